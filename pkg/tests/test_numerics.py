"""Unit tests for the signed-sum plumbing and signed-log arithmetic."""

import math

import pytest

from wfisher.errors import ConditioningError
from wfisher.numerics import (
    ConditioningPolicy,
    finish_signed_sum,
    signed_sum,
    slog_from_float,
    slog_mul,
    slog_sum,
    slog_to_float,
)


class TestSignedSum:
    def test_matches_fsum(self):
        terms = [1e16, 1.0, -1e16, 2.0, -0.5]
        total, abs_total = signed_sum(terms)
        assert total == math.fsum(terms) == 2.5
        assert abs_total == 2e16 + 3.5

    def test_empty(self):
        assert signed_sum([]) == (0.0, 0.0)


class TestFinishSignedSum:
    def test_plain_value_passes_through(self):
        value, condition = finish_signed_sum(0.25, 1.0, upper=1.0)
        assert value == 0.25
        assert condition == 4.0

    def test_roundoff_below_zero_clips(self):
        value, condition = finish_signed_sum(-1e-16, 2.0, upper=1.0)
        assert value == 0.0
        assert condition > 1e12  # saturated, but certified at the boundary

    def test_roundoff_above_upper_clips(self):
        value, _ = finish_signed_sum(1.0 + 1e-16, 2.0, upper=1.0)
        assert value == 1.0

    def test_tiny_positive_snaps_to_zero(self):
        # indistinguishable from 0 at the noise floor: snap, don't raise
        value, _ = finish_signed_sum(1e-17, 2.0, upper=1.0)
        assert value == 0.0

    def test_far_below_zero_raises(self):
        with pytest.raises(ConditioningError):
            finish_signed_sum(-1e-3, 2.0, upper=1.0)

    def test_far_above_upper_raises(self):
        with pytest.raises(ConditioningError):
            finish_signed_sum(1.5, 2.0, upper=1.0)

    def test_no_upper_bound_for_densities(self):
        value, _ = finish_signed_sum(7.5, 8.0, upper=None)
        assert value == 7.5

    def test_condition_above_threshold_raises(self):
        # raw is above the boundary slack but the ratio is still hopeless
        with pytest.raises(ConditioningError) as info:
            finish_signed_sum(5e-12, 10.0, upper=1.0)
        assert info.value.condition > 1e12

    def test_boundary_with_huge_noise_floor_raises(self):
        # sum == 0 but each term is ~1e9: "zero" cannot be certified
        with pytest.raises(ConditioningError):
            finish_signed_sum(0.0, 2e9, upper=1.0)

    def test_custom_policy(self):
        policy = ConditioningPolicy(warn_at=10.0, fail_at=100.0)
        with pytest.raises(ConditioningError):
            finish_signed_sum(1e-3, 1.0, policy=policy, upper=1.0)

    def test_all_zero_terms(self):
        assert finish_signed_sum(0.0, 0.0, upper=1.0) == (0.0, 1.0)


class TestSlog:
    @pytest.mark.parametrize("x", [3.0, -2.5, 1e-200, -1e200, 0.0])
    def test_roundtrip(self, x):
        # exp(log(x)) is accurate to ~|log x| * eps, not to one ulp
        assert slog_to_float(slog_from_float(x)) == pytest.approx(x, rel=1e-13)

    def test_mul(self):
        a, b = slog_from_float(-3.0), slog_from_float(4.0)
        assert slog_to_float(slog_mul(a, b)) == pytest.approx(-12.0, rel=1e-14)

    def test_mul_zero(self):
        assert slog_mul(slog_from_float(0.0), slog_from_float(5.0))[0] == 0

    def test_sum_matches_fsum(self):
        vals = [3.25, -1.5, 0.125, -7.0, 2.0]
        got = slog_to_float(slog_sum(slog_from_float(v) for v in vals))
        assert got == pytest.approx(math.fsum(vals), rel=1e-14)

    def test_sum_beyond_float_range(self):
        # 2e308 + 2e308 overflows plain doubles; signed-log keeps going
        big = (1, math.log(2e307) + math.log(10.0))
        total = slog_sum([big, big])
        assert total[0] == 1
        assert total[1] == pytest.approx(math.log(2e307) + math.log(10.0) + math.log(2.0))

    def test_sum_cancels_to_zero(self):
        assert slog_sum([slog_from_float(1.0), slog_from_float(-1.0)])[0] == 0
