"""Validation, statistic, and dispatch behavior of the core module."""

import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from wfisher import (
    CombinedResult,
    CombineMethod,
    CombineOptions,
    ConditioningError,
    InvalidEvidenceError,
    MethodError,
    Statistic,
    WeightedEvidence,
    ZeroPValueError,
    combine,
    combine_pvalues,
    compute_statistic,
    tail_identical,
)
from wfisher.errors import ClusterSpanError

E_INV = math.exp(-1.0)


class TestWeightedEvidence:
    def test_accepts_valid_pairs(self):
        ev = WeightedEvidence(((0.5, 1.0), (0.25, 2.5)))
        assert ev.pvalues == (0.5, 0.25)
        assert ev.weights == (1.0, 2.5)
        assert len(ev) == 2

    def test_p_of_one_is_legal(self):
        WeightedEvidence(((1.0, 3.0),))

    def test_zero_pvalue_gets_its_own_error(self):
        with pytest.raises(ZeroPValueError):
            WeightedEvidence(((0.0, 1.0),))

    @pytest.mark.parametrize("p", [-0.1, 1.0000001, float("nan"), float("inf")])
    def test_out_of_range_pvalues(self, p):
        with pytest.raises(InvalidEvidenceError):
            WeightedEvidence(((p, 1.0),))

    @pytest.mark.parametrize("w", [0.0, -1.0, float("nan"), float("inf")])
    def test_bad_weights(self, w):
        with pytest.raises(InvalidEvidenceError):
            WeightedEvidence(((0.5, w),))

    def test_empty_rejected(self):
        with pytest.raises(InvalidEvidenceError):
            WeightedEvidence(())

    def test_from_pvalues_defaults_weights_to_one(self):
        ev = WeightedEvidence.from_pvalues([0.1, 0.2])
        assert ev.weights == (1.0, 1.0)

    def test_from_pvalues_length_mismatch(self):
        with pytest.raises(InvalidEvidenceError):
            WeightedEvidence.from_pvalues([0.1, 0.2], [1.0])


class TestComputeStatistic:
    def test_two_tenths(self):
        stat = compute_statistic(WeightedEvidence(((0.1, 1.0), (0.1, 1.0))))
        assert stat.value == pytest.approx(4.605170185988091, rel=1e-12)
        assert stat.k == 2

    def test_p_one_contributes_nothing(self):
        assert compute_statistic(WeightedEvidence(((1.0, 5.0),))).value == 0.0

    def test_weighted_log(self):
        stat = compute_statistic(WeightedEvidence(((E_INV, 2.0),)))
        assert stat.value == pytest.approx(2.0, abs=1e-12)

    def test_many_terms_compensated(self):
        # 10^4 equal tiny contributions: fsum keeps the exact multiple
        ev = WeightedEvidence(tuple((0.9999999, 1.0) for _ in range(10_000)))
        expected = -10_000 * math.log(0.9999999)
        assert compute_statistic(ev).value == pytest.approx(expected, rel=1e-13)


class TestCombineExamples:
    def test_two_equal_tenths_identical_path(self):
        result = combine(WeightedEvidence(((0.1, 1.0), (0.1, 1.0))))
        v = 4.605170185988091
        assert result.method is CombineMethod.IDENTICAL
        assert result.p_combined == pytest.approx((1 + v) * math.exp(-v), rel=1e-12)
        assert result.p_combined == pytest.approx(0.0560517, abs=1e-6)
        assert result.warning is None

    def test_distinct_weights_example(self):
        # V = 3 with weights {2, 1}: 2 e^-1.5 - e^-3
        result = combine(WeightedEvidence(((E_INV, 2.0), (E_INV, 1.0))))
        assert result.method is CombineMethod.DISTINCT
        expected = 2 * math.exp(-1.5) - math.exp(-3.0)
        assert result.p_combined == pytest.approx(expected, rel=1e-12)

    def test_general_path_example(self):
        # weights {1, 1, 2}, V = 4: tail is 4 e^-2 - 7 e^-4
        result = combine(WeightedEvidence(((E_INV, 1.0), (E_INV, 1.0), (E_INV, 2.0))))
        assert result.method is CombineMethod.GENERAL
        expected = 4 * math.exp(-2.0) - 7 * math.exp(-4.0)
        assert result.p_combined == pytest.approx(expected, rel=1e-10)

    def test_all_pvalues_one(self):
        assert combine(WeightedEvidence(((1.0, 2.0), (1.0, 3.0)))).p_combined == 1.0

    def test_result_dict_shape(self):
        d = combine_pvalues([0.2, 0.4]).as_dict()
        assert list(d) == ["p_combined", "statistic", "k", "method", "condition", "warning"]


class TestCombineProperties:
    @given(
        p=st.floats(min_value=1e-300, max_value=1.0, exclude_min=False),
        w=st.floats(min_value=1e-6, max_value=1e6),
    )
    def test_single_entry_identity(self, p, w):
        result = combine(WeightedEvidence(((p, w),)))
        assert result.p_combined == pytest.approx(p, rel=1e-12)

    @given(
        pairs=st.lists(
            st.tuples(
                st.floats(min_value=1e-6, max_value=1.0),
                st.floats(min_value=0.01, max_value=100.0),
            ),
            min_size=1,
            max_size=6,
        ),
        scale=st.floats(min_value=1e-3, max_value=1e3),
    )
    @settings(max_examples=150, deadline=None)
    def test_scale_invariance(self, pairs, scale):
        try:
            base = combine(WeightedEvidence(tuple(pairs)))
            scaled = combine(
                WeightedEvidence(tuple((p, w * scale) for p, w in pairs))
            )
        except (ClusterSpanError, ConditioningError):
            assume(False)
            return
        assert scaled.p_combined == pytest.approx(base.p_combined, rel=1e-10)

    @given(
        pairs=st.lists(
            st.tuples(
                st.floats(min_value=1e-4, max_value=0.999),
                st.floats(min_value=0.1, max_value=10.0),
            ),
            min_size=2,
            max_size=5,
        ),
        index=st.integers(min_value=0, max_value=4),
        shrink=st.floats(min_value=0.05, max_value=0.95),
    )
    @settings(max_examples=150, deadline=None)
    def test_monotone_in_each_pvalue(self, pairs, index, shrink):
        index %= len(pairs)
        try:
            before = combine(WeightedEvidence(tuple(pairs)))
            smaller = list(pairs)
            smaller[index] = (pairs[index][0] * shrink, pairs[index][1])
            after = combine(WeightedEvidence(tuple(smaller)))
        except (ClusterSpanError, ConditioningError):
            assume(False)
            return
        assert after.p_combined <= before.p_combined * (1 + 1e-12) + 1e-15


class TestMethodSelection:
    def test_auto_labels(self):
        assert combine_pvalues([0.1, 0.2], [1.0, 1.0]).method is CombineMethod.IDENTICAL
        assert combine_pvalues([0.1, 0.2], [1.0, 2.0]).method is CombineMethod.DISTINCT
        assert (
            combine_pvalues([0.1, 0.2, 0.3], [1.0, 1.0, 2.0]).method is CombineMethod.GENERAL
        )

    def test_forcing_identical_on_distinct_weights(self):
        with pytest.raises(MethodError):
            combine_pvalues([0.1, 0.2], [1.0, 2.0], CombineOptions(method="identical"))

    def test_forcing_distinct_on_tied_weights(self):
        with pytest.raises(MethodError):
            combine_pvalues([0.1, 0.2], [1.0, 1.0], CombineOptions(method="distinct"))

    def test_general_always_applies(self):
        forced = combine_pvalues([0.1, 0.2], [1.0, 1.0], CombineOptions(method="general"))
        auto = combine_pvalues([0.1, 0.2], [1.0, 1.0])
        assert forced.method is CombineMethod.GENERAL
        assert forced.p_combined == pytest.approx(auto.p_combined, rel=1e-12)

    def test_unknown_method_rejected(self):
        with pytest.raises(MethodError):
            CombineOptions(method="fastest")

    def test_bad_tolerance_rejected(self):
        with pytest.raises(InvalidEvidenceError):
            CombineOptions(rel_tol=0.0)

    def test_small_mc_samples_rejected(self):
        with pytest.raises(InvalidEvidenceError):
            CombineOptions(mc_samples=10)


class TestConditioningFlow:
    def test_near_tie_beyond_tol_warns_but_stays_accurate(self):
        # gap 1e-7 > tol 1e-9: distinct path, heavy but survivable cancellation
        result = combine_pvalues([0.1, 0.1], [1.0, 1.0 + 1e-7])
        assert result.method is CombineMethod.DISTINCT
        assert result.condition > 1e6
        assert result.warning is not None
        v = result.statistic.value
        assert result.p_combined == pytest.approx(tail_identical(v, 1.0, 2), rel=1e-6)

    def test_near_tie_within_tol_routes_to_identical(self):
        result = combine_pvalues(
            [0.1, 0.1], [1.0, 1.0 + 1e-7], CombineOptions(rel_tol=1e-6)
        )
        assert result.method is CombineMethod.IDENTICAL
        assert result.condition == 1.0
        assert result.warning is None

    def test_hopeless_cancellation_raises(self):
        with pytest.raises(ConditioningError):
            combine_pvalues([0.5, 0.5], [1.0, 1.0 + 1e-13], CombineOptions(rel_tol=1e-15))

    def test_mc_fallback_rescues(self):
        opts = CombineOptions(rel_tol=1e-15, fallback_mc=True, mc_samples=200_000, mc_seed=9)
        result = combine_pvalues([0.5, 0.5], [1.0, 1.0 + 1e-13], opts)
        assert result.warning is not None and "Monte Carlo" in result.warning
        v = result.statistic.value
        truth = tail_identical(v, 1.0, 2)
        assert result.p_combined == pytest.approx(truth, abs=5 * 0.0011)  # ~5 std errs

    def test_identical_path_is_perfectly_conditioned(self):
        result = combine_pvalues([0.01] * 8)
        assert result.condition == 1.0
        assert result.warning is None


def test_statistic_and_result_are_frozen():
    stat = Statistic(value=1.0, k=1)
    with pytest.raises(AttributeError):
        stat.value = 2.0
    result = CombinedResult(
        p_combined=0.5, statistic=stat, method=CombineMethod.IDENTICAL, condition=1.0
    )
    with pytest.raises(AttributeError):
        result.p_combined = 0.1
