"""Closed-form densities and survival functions for weighted sums of unit
exponential variables.

Two weight configurations admit closed forms: all weights pairwise distinct
(a hypoexponential distribution) and all weights identical (an Erlang
distribution, the classic unweighted Fisher combination when w = 1).  The
module also exposes two analytic identities, ``residue_sum`` and
``upper_incomplete_integral``, that the test suite uses as independent
anchors for cancellation and quadrature checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import InvalidEvidenceError
from .numerics import (
    DEFAULT_POLICY,
    DEFAULT_WEIGHT_RTOL,
    ConditioningPolicy,
    finish_signed_sum,
    signed_sum,
)

# Largest V/w for which exp(-V/w) is a normal double; beyond it the
# identical-weights series is accumulated in log space.
_EXP_UNDERFLOW = 700.0


@dataclass(frozen=True)
class DistinctWeights:
    """Positive weights that are pairwise distinct under a relative tolerance.

    The distinct-weights tail formula divides by every pairwise difference
    (w_i - w_j), so admitting near-ties here would guarantee catastrophic
    cancellation downstream.  Near-ties belong in the multiplicity-aware
    path instead.
    """

    weights: tuple[float, ...]
    rel_tol: float = DEFAULT_WEIGHT_RTOL

    def __post_init__(self):
        ws = tuple(float(w) for w in self.weights)
        object.__setattr__(self, "weights", ws)
        if not ws:
            raise InvalidEvidenceError("weights must be non-empty")
        for w in ws:
            if not math.isfinite(w) or w <= 0.0:
                raise InvalidEvidenceError(f"weights must be positive and finite, got {w!r}")
        if not 0.0 < self.rel_tol < 1.0:
            raise InvalidEvidenceError(f"rel_tol must be in (0, 1), got {self.rel_tol!r}")
        ordered = sorted(ws)
        for lo, hi in zip(ordered, ordered[1:]):
            if hi - lo <= self.rel_tol * hi:
                raise InvalidEvidenceError(
                    f"weights {lo!r} and {hi!r} are not distinct at relative "
                    f"tolerance {self.rel_tol:g}"
                )

    @property
    def k(self) -> int:
        return len(self.weights)


def _as_distinct(weights) -> DistinctWeights:
    if isinstance(weights, DistinctWeights):
        return weights
    return DistinctWeights(tuple(weights))


def _check_nonnegative(v: float, name: str = "v") -> float:
    v = float(v)
    if not v >= 0.0:
        raise ValueError(f"{name} must be >= 0, got {v!r}")
    return v


def _hypoexp_terms(ws: Sequence[float], exponent: int, v: float) -> Iterable[float]:
    """Signed terms  w_i^exponent * exp(-v/w_i) / prod_{j!=i}(w_i - w_j).

    Each term is assembled as sign * exp(log-magnitude): the raw power
    w_i^exponent overflows for moderate k, the log form never does.
    """
    for i, wi in enumerate(ws):
        sign = 1.0
        logmag = exponent * math.log(wi) - v / wi
        for j, wj in enumerate(ws):
            if j == i:
                continue
            diff = wi - wj
            if diff < 0.0:
                sign = -sign
            logmag -= math.log(abs(diff))
        yield sign * math.exp(logmag)


def pdf_distinct(v, weights, *, policy: ConditioningPolicy = DEFAULT_POLICY) -> float:
    """Density at ``v`` of the weighted exponential sum, distinct weights.

    For a single weight this is the plain exponential density exp(-v/w)/w;
    for k >= 2 it is the hypoexponential density

        sum_i  w_i^(k-2) exp(-v/w_i) / prod_{j!=i} (w_i - w_j).

    Raises ConditioningError when cancellation between the signed terms
    exceeds the policy's hard threshold.
    """
    v = _check_nonnegative(v)
    dw = _as_distinct(weights)
    if dw.k == 1:
        w = dw.weights[0]
        return math.exp(-v / w) / w
    raw, abs_sum = signed_sum(_hypoexp_terms(dw.weights, dw.k - 2, v))
    value, _ = finish_signed_sum(raw, abs_sum, policy=policy, upper=None, label="pdf_distinct")
    return value


def tail_distinct_with_condition(
    v, weights, *, policy: ConditioningPolicy = DEFAULT_POLICY
) -> tuple[float, float]:
    """Survival probability P[sum >= v] and its cancellation condition."""
    v = _check_nonnegative(v)
    dw = _as_distinct(weights)
    if dw.k == 1:
        return math.exp(-v / dw.weights[0]), 1.0
    raw, abs_sum = signed_sum(_hypoexp_terms(dw.weights, dw.k - 1, v))
    return finish_signed_sum(raw, abs_sum, policy=policy, upper=1.0, label="tail_distinct")


def tail_distinct(v, weights, *, policy: ConditioningPolicy = DEFAULT_POLICY) -> float:
    """Survival probability P[sum >= v] for pairwise-distinct weights.

        sum_i  w_i^(k-1) exp(-v/w_i) / prod_{j!=i} (w_i - w_j)

    The terms alternate in sign; the result is clipped to [0, 1] only when
    it strays outside by no more than the accumulated roundoff, and a
    ConditioningError is raised when cancellation makes the digits
    meaningless.
    """
    return tail_distinct_with_condition(v, weights, policy=policy)[0]


def pdf_identical(v, w, k: int) -> float:
    """Density at ``v`` of the sum of k exponentials with common weight w.

    This is the Erlang(k, 1/w) density (v/w)^(k-1) exp(-v/w) / ((k-1)! w),
    evaluated in log space so large k and large v/w cannot overflow.
    """
    v = _check_nonnegative(v)
    w, k = _check_weight_count(w, k)
    x = v / w
    if k == 1:
        return math.exp(-x) / w
    if v == 0.0:
        return 0.0
    log_density = (k - 1) * math.log(x) - x - math.lgamma(k) - math.log(w)
    return math.exp(log_density)


def tail_identical(v, w, k: int) -> float:
    """Survival probability P[sum >= v] for k exponentials of common weight w.

    Equals exp(-x) * sum_{i<k} x^i / i!  with x = v/w — the Poisson-sum form
    of the regularized upper incomplete gamma Q(k, x), and the chi-squared
    survival function with 2k degrees of freedom at 2x.  All terms are
    positive, so there is no cancellation; the only hazards are overflow of
    the partial sums and underflow of exp(-x), both handled by switching to
    log-space accumulation for large x.
    """
    v = _check_nonnegative(v)
    w, k = _check_weight_count(w, k)
    x = v / w
    if x == 0.0:
        return 1.0
    if x <= _EXP_UNDERFLOW:
        term = 1.0
        terms = [term]
        for i in range(1, k):
            term *= x / i
            terms.append(term)
        return min(1.0, math.exp(-x) * math.fsum(terms))
    logs = [i * math.log(x) - math.lgamma(i + 1) for i in range(k)]
    top = max(logs)
    log_tail = -x + top + math.log(math.fsum(math.exp(t - top) for t in logs))
    if log_tail >= 0.0:
        return 1.0
    try:
        return math.exp(log_tail)
    except OverflowError:  # pragma: no cover - log_tail <= 0 cannot overflow
        return 0.0


def residue_sum(weights) -> float:
    """The analytically-zero residue combination used as a test anchor.

    For m >= 2 pairwise-distinct weights,

        sum_i  w_i^(m-2) / prod_{j!=i} (w_i - w_j)  =  0,

    exactly, which makes the computed value a direct measurement of the
    cancellation noise in this family of sums.  The raw signed sum is
    returned without clipping or policy checks.
    """
    dw = _as_distinct(weights)
    if dw.k < 2:
        raise ValueError("residue_sum needs at least two distinct weights")
    raw, _ = signed_sum(_hypoexp_terms(dw.weights, dw.k - 2, 0.0))
    return raw


def upper_incomplete_integral(c, a, n: int) -> float:
    """The integral of u^n exp(-a u) for u from c to infinity.

    Closed form: c^n * (sum_{j=0}^{n} j! C(n,j) (c a)^{-j}) * exp(-c a) / a
    for c > 0, and the gamma-function limit n! / a^(n+1) at c = 0.  The
    series terms are all positive, so the sum is evaluated as a scaled
    log-space accumulation with no cancellation.
    """
    c = _check_nonnegative(c, "c")
    a = float(a)
    if not (math.isfinite(a) and a > 0.0):
        raise ValueError(f"a must be positive and finite, got {a!r}")
    n = int(n)
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n!r}")
    if n == 0:
        return math.exp(-c * a) / a
    if c == 0.0:
        return math.exp(_log_factorial(n) - (n + 1) * math.log(a))
    # term j: n!/(n-j)! * c^(n-j) * a^(-j), times exp(-c a)/a overall
    log_c, log_a = math.log(c), math.log(a)
    logs = [
        _log_factorial(n) - _log_factorial(n - j) + (n - j) * log_c - j * log_a
        for j in range(n + 1)
    ]
    top = max(logs)
    scaled = math.fsum(math.exp(t - top) for t in logs)
    return math.exp(top + math.log(scaled) - c * a - log_a)


def _log_factorial(n: int) -> float:
    # exact integer factorial below the float-exact range, lgamma beyond
    if n <= 20:
        return math.log(math.factorial(n))
    return math.lgamma(n + 1)


def _check_weight_count(w, k) -> tuple[float, int]:
    w = float(w)
    if not (math.isfinite(w) and w > 0.0):
        raise InvalidEvidenceError(f"weight must be positive and finite, got {w!r}")
    k = int(k)
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k!r}")
    return w, k
