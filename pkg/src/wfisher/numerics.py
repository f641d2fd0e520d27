"""Floating-point plumbing shared by the tail evaluators.

The recurring hazard in this package is the signed exponential sum: every
term is benign on its own, but terms of opposite sign may nearly cancel.
This module quantifies that cancellation (the ``condition`` diagnostic),
clips harmless roundoff at the [0, 1] boundaries, and refuses to return
digits that are pure noise.  It also provides a small signed-log number
representation for coefficient computations whose intermediates exceed
float range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConditioningError

# Relative noise attributed to each term of a signed sum.  Terms are formed
# via exp() of log-space expressions, so their error grows with the
# magnitude of the exponent; 1e-13 covers exponents up to ~1e3 with margin.
TERM_NOISE = 1e-13

# A boundary-clipped result is returned only while its noise floor stays
# below this absolute level; past it, even "zero" cannot be certified.
BOUNDARY_CERTAINTY = 1e-8

# Default relative tolerance under which two weights count as identical.
# Tail formulas for distinct weights divide by (w_i - w_j), so near-ties
# must be merged before they reach those formulas.
DEFAULT_WEIGHT_RTOL = 1e-9

DEFAULT_WARN_CONDITION = 1e6
DEFAULT_FAIL_CONDITION = 1e12


@dataclass(frozen=True)
class ConditioningPolicy:
    """Thresholds on condition = sum(|term|) / |result|."""

    warn_at: float = DEFAULT_WARN_CONDITION
    fail_at: float = DEFAULT_FAIL_CONDITION


DEFAULT_POLICY = ConditioningPolicy()


def signed_sum(terms) -> tuple[float, float]:
    """Compensated sum of signed terms.

    Returns ``(sum, abs_sum)`` where ``abs_sum`` is the compensated sum of
    |term|, the numerator of the conditioning diagnostic.
    """
    vals = list(terms)
    return math.fsum(vals), math.fsum(abs(t) for t in vals)


def finish_signed_sum(
    raw: float,
    abs_sum: float,
    *,
    policy: ConditioningPolicy = DEFAULT_POLICY,
    upper: float | None = None,
    label: str = "signed exponential sum",
) -> tuple[float, float]:
    """Validate a raw signed sum against its cancellation noise.

    ``upper`` is the analytic upper bound of the result (1.0 for
    probabilities, None for densities); the analytic lower bound is always
    0.  Returns ``(value, condition)``.

    Rules, in order:
      * values outside [0, upper] by more than the roundoff slack are a
        cancellation failure, not roundoff -> ConditioningError;
      * values within slack of a boundary are snapped to the boundary and
        exempt from the ratio check, provided the slack itself is small
        enough in absolute terms to certify the boundary;
      * otherwise condition = abs_sum / |raw| must not exceed the policy's
        hard threshold.
    """
    if abs_sum == 0.0 or not math.isfinite(abs_sum):
        if math.isfinite(abs_sum):
            return 0.0, 1.0
        raise ConditioningError(f"{label}: non-finite terms")
    slack = abs_sum * TERM_NOISE
    if raw < -slack or (upper is not None and raw > upper + slack):
        raise ConditioningError(
            f"{label}: result {raw:.6g} outside [0, {upper}] beyond the "
            f"roundoff slack {slack:.3g}",
            condition=abs_sum / max(abs(raw), slack),
        )
    condition = abs_sum / max(abs(raw), slack)
    at_lower = abs(raw) <= slack
    at_upper = upper is not None and abs(raw - upper) <= slack
    if at_lower or at_upper:
        if slack <= BOUNDARY_CERTAINTY:
            return (0.0 if at_lower else upper), condition
        raise ConditioningError(
            f"{label}: result indistinguishable from "
            f"{'0' if at_lower else upper} but noise floor {slack:.3g} is "
            f"too large to certify it",
            condition=condition,
        )
    value = raw if raw >= 0.0 else 0.0
    if upper is not None and value > upper:
        value = upper
    if condition > policy.fail_at:
        raise ConditioningError(
            f"{label}: cancellation condition {condition:.3g} exceeds the "
            f"hard threshold {policy.fail_at:g}",
            condition=condition,
        )
    return value, condition


# ---------------------------------------------------------------------------
# Signed-log scalars: (sign, log|x|) pairs for out-of-float-range work.
# ---------------------------------------------------------------------------

NEG_INF = float("-inf")


def slog_from_float(x: float) -> tuple[int, float]:
    if x == 0.0:
        return 0, NEG_INF
    return (1 if x > 0 else -1), math.log(abs(x))


def slog_to_float(s: tuple[int, float]) -> float:
    """May overflow to +-inf; callers decide whether that is acceptable."""
    sign, logmag = s
    if sign == 0:
        return 0.0
    try:
        mag = math.exp(logmag)
    except OverflowError:
        mag = float("inf")
    return sign * mag


def slog_mul(a: tuple[int, float], b: tuple[int, float]) -> tuple[int, float]:
    if a[0] == 0 or b[0] == 0:
        return 0, NEG_INF
    return a[0] * b[0], a[1] + b[1]


def slog_sum(items) -> tuple[int, float]:
    """Signed sum of slog scalars, scaled by the largest magnitude."""
    items = [s for s in items if s[0] != 0]
    if not items:
        return 0, NEG_INF
    top = max(logmag for _, logmag in items)
    acc = math.fsum(sign * math.exp(logmag - top) for sign, logmag in items)
    if acc == 0.0:
        return 0, NEG_INF
    return (1 if acc > 0 else -1), top + math.log(abs(acc))
