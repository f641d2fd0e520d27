"""Evidence validation, the weighted log-p statistic, and path dispatch.

The summary statistic for entries (p_i, w_i) is V = -sum_i w_i ln p_i.
Under the shared null each -ln p_i is a unit exponential variable, so V is
a weighted sum of exponentials and the combined p-value is its survival
probability at the observed value.  ``combine`` clusters the weights and
routes to whichever tail evaluation applies: the Erlang closed form when
one weight value remains, the hypoexponential closed form when all values
are distinct, and the partial-fraction path otherwise.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .closed_form import DistinctWeights, tail_distinct_with_condition, tail_identical
from .errors import ConditioningError, InvalidEvidenceError, MethodError, ZeroPValueError
from .general_pfd import group_weights, pfd_coefficients, right_tail_with_condition
from .numerics import (
    DEFAULT_FAIL_CONDITION,
    DEFAULT_WARN_CONDITION,
    DEFAULT_WEIGHT_RTOL,
    ConditioningPolicy,
)


class CombineMethod(str, enum.Enum):
    """Which tail evaluation produced a combined p-value."""

    IDENTICAL = "identical"
    DISTINCT = "distinct"
    GENERAL = "general"


_METHOD_CHOICES = ("auto", "identical", "distinct", "general")


@dataclass(frozen=True)
class WeightedEvidence:
    """Validated (p-value, weight) pairs, the sole input of the combiner.

    Every p must lie in (0, 1] and every weight must be positive and
    finite.  p = 0 raises ZeroPValueError at construction instead of being
    clamped; p = 1 is legal and simply contributes nothing to the
    statistic.
    """

    entries: tuple[tuple[float, float], ...]

    def __post_init__(self):
        try:
            normalized = tuple((float(p), float(w)) for p, w in self.entries)
        except (TypeError, ValueError) as exc:
            raise InvalidEvidenceError(f"entries must be (p, weight) pairs: {exc}") from exc
        object.__setattr__(self, "entries", normalized)
        if not normalized:
            raise InvalidEvidenceError("evidence must contain at least one entry")
        for idx, (p, w) in enumerate(normalized):
            if p == 0.0:
                raise ZeroPValueError(
                    f"entry {idx}: p-value is exactly 0; refusing to clamp "
                    f"(a zero p-value makes any combination degenerate)"
                )
            if math.isnan(p) or not 0.0 < p <= 1.0:
                raise InvalidEvidenceError(f"entry {idx}: p-value must be in (0, 1], got {p!r}")
            if not (math.isfinite(w) and w > 0.0):
                raise InvalidEvidenceError(
                    f"entry {idx}: weight must be positive and finite, got {w!r}"
                )

    @classmethod
    def from_pvalues(
        cls, pvalues: Iterable[float], weights: Sequence[float] | None = None
    ) -> "WeightedEvidence":
        ps = list(pvalues)
        if weights is None:
            ws: Sequence[float] = [1.0] * len(ps)
        else:
            ws = list(weights)
            if len(ws) != len(ps):
                raise InvalidEvidenceError(
                    f"{len(ps)} p-values but {len(ws)} weights"
                )
        return cls(tuple(zip(ps, ws)))

    @property
    def pvalues(self) -> tuple[float, ...]:
        return tuple(p for p, _ in self.entries)

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(w for _, w in self.entries)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class Statistic:
    """The weighted sum of negative log p-values, in nats."""

    value: float
    k: int


@dataclass(frozen=True)
class CombineOptions:
    """Knobs for ``combine``; the defaults suit almost every caller.

    method: "auto" picks the path from the clustered weights; forcing a
        path that does not apply raises MethodError.
    rel_tol: relative tolerance used to cluster weights into groups.
    warn_condition / fail_condition: cancellation-condition thresholds; a
        result between them carries a warning, one beyond fail_condition
        raises ConditioningError (or triggers the Monte Carlo fallback).
    fallback_mc: estimate the tail by simulation instead of failing when
        the analytic path is too ill-conditioned.
    """

    method: str = "auto"
    rel_tol: float = DEFAULT_WEIGHT_RTOL
    warn_condition: float = DEFAULT_WARN_CONDITION
    fail_condition: float = DEFAULT_FAIL_CONDITION
    fallback_mc: bool = False
    mc_samples: int = 1_000_000
    mc_seed: int = 0

    def __post_init__(self):
        if self.method not in _METHOD_CHOICES:
            raise MethodError(f"method must be one of {_METHOD_CHOICES}, got {self.method!r}")
        if not 0.0 < self.rel_tol < 1.0:
            raise InvalidEvidenceError(f"rel_tol must be in (0, 1), got {self.rel_tol!r}")
        if self.mc_samples < 1000:
            raise InvalidEvidenceError(f"mc_samples must be >= 1000, got {self.mc_samples!r}")

    @property
    def policy(self) -> ConditioningPolicy:
        return ConditioningPolicy(warn_at=self.warn_condition, fail_at=self.fail_condition)


@dataclass(frozen=True)
class CombinedResult:
    """Combined p-value plus how it was obtained and how much to trust it."""

    p_combined: float
    statistic: Statistic
    method: CombineMethod
    condition: float
    warning: str | None = None

    def as_dict(self) -> dict:
        return {
            "p_combined": self.p_combined,
            "statistic": self.statistic.value,
            "k": self.statistic.k,
            "method": self.method.value,
            "condition": self.condition,
            "warning": self.warning,
        }


def compute_statistic(evidence: WeightedEvidence) -> Statistic:
    """V = -sum_i w_i ln p_i, accumulated with compensated summation.

    Every term is non-negative (p <= 1), so V >= 0, with V = 0 exactly when
    every p-value is 1.
    """
    value = math.fsum(-w * math.log(p) for p, w in evidence.entries)
    return Statistic(value=value, k=len(evidence))


def combine(evidence: WeightedEvidence, options: CombineOptions | None = None) -> CombinedResult:
    """Combine weighted p-values into a single right-tail p-value.

    Weights are clustered at options.rel_tol; the statistic's survival
    probability is then evaluated by the path matching the cluster shape
    (or the path forced by options.method).  The result records the path,
    the cancellation condition of the signed sums involved, and a warning
    when the condition is large or the Monte Carlo fallback was used.
    """
    opts = options or CombineOptions()
    stat = compute_statistic(evidence)
    groups = group_weights(evidence.weights, opts.rel_tol)
    method = _resolve_method(opts.method, groups)
    policy = opts.policy
    warning = None
    try:
        if method is CombineMethod.IDENTICAL:
            only = groups.groups[0]
            p, condition = tail_identical(stat.value, only.weight, only.count), 1.0
        elif method is CombineMethod.DISTINCT:
            dw = DistinctWeights(groups.weights, rel_tol=opts.rel_tol)
            p, condition = tail_distinct_with_condition(stat.value, dw, policy=policy)
        else:
            coeffs = pfd_coefficients(groups)
            p, condition = right_tail_with_condition(stat.value, coeffs, policy=policy)
    except ConditioningError as exc:
        if not opts.fallback_mc:
            raise
        from .oracle import mc_tail  # deferred: keeps the analytic paths numpy-free

        estimate = mc_tail(evidence.weights, stat.value, opts.mc_samples, opts.mc_seed)
        p, condition = estimate.p_hat, exc.condition
        warning = (
            f"{method.value} path failed its conditioning check "
            f"(condition {exc.condition:.3g}); fell back to Monte Carlo with "
            f"{estimate.n_samples} samples (std err {estimate.std_err:.2g})"
        )
    if warning is None and condition > policy.warn_at:
        warning = (
            f"cancellation condition {condition:.3g} exceeds {policy.warn_at:g}; "
            f"roughly {math.log10(condition):.0f} of 16 digits are lost"
        )
    return CombinedResult(
        p_combined=p, statistic=stat, method=method, condition=condition, warning=warning
    )


def combine_pvalues(
    pvalues: Iterable[float],
    weights: Sequence[float] | None = None,
    options: CombineOptions | None = None,
) -> CombinedResult:
    """Convenience wrapper: combine bare p-values with optional weights."""
    return combine(WeightedEvidence.from_pvalues(pvalues, weights), options)


def _resolve_method(requested: str, groups) -> CombineMethod:
    single_group = len(groups) == 1
    all_simple = all(g.count == 1 for g in groups)
    if requested == "auto":
        if single_group:
            return CombineMethod.IDENTICAL
        if all_simple:
            return CombineMethod.DISTINCT
        return CombineMethod.GENERAL
    if requested == "identical":
        if not single_group:
            raise MethodError(
                f"method 'identical' needs a single weight value; clustering "
                f"found {len(groups)} distinct values"
            )
        return CombineMethod.IDENTICAL
    if requested == "distinct":
        if not all_simple:
            dupes = [g.weight for g in groups if g.count > 1]
            raise MethodError(
                f"method 'distinct' needs pairwise-distinct weights; "
                f"value(s) {dupes} appear more than once"
            )
        return CombineMethod.DISTINCT
    return CombineMethod.GENERAL
