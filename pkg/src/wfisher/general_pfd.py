"""Tail evaluation for arbitrary weight multisets.

Weights are first clustered into groups of a representative weight and a
multiplicity.  The Laplace transform of the total density is then a
rational function with one pole per group (order = multiplicity) plus a
simple pole at zero; its partial fraction decomposition is computed pole by
pole with a log-derivative recursion, after which the left tail inverts
term by term into polynomial-times-exponential pieces.

The recursion works on factorial-scaled Taylor coefficients (derivative /
order!), which keeps every quantity the size of the final coefficients and
banishes explicit factorials from the intermediates.  Should a coefficient
still leave float range, the whole computation falls back to signed-log
arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

from .errors import ClusterSpanError, ConditioningError, InvalidEvidenceError
from .numerics import (
    DEFAULT_POLICY,
    DEFAULT_WEIGHT_RTOL,
    NEG_INF,
    ConditioningPolicy,
    finish_signed_sum,
    signed_sum,
    slog_mul,
    slog_sum,
)

# A cluster whose members span more than this multiple of the linking
# tolerance has no meaningful single representative.
_SPAN_FACTOR = 10.0

# Invariant check threshold: sum of the first-order coefficients must be -1.
_COEFF_INVARIANT_TOL = 1e-8

# Coefficients larger than this switch the whole set to signed-log storage.
_OVERFLOW_GUARD = 1e300


@dataclass(frozen=True)
class WeightGroup:
    """One cluster of (nearly) identical weights."""

    weight: float  # representative weight (cluster mean)
    count: int  # multiplicity
    rate: float  # 1 / weight

    def __post_init__(self):
        if not (math.isfinite(self.weight) and self.weight > 0.0):
            raise InvalidEvidenceError(f"group weight must be positive, got {self.weight!r}")
        if self.count < 1:
            raise InvalidEvidenceError(f"group count must be >= 1, got {self.count!r}")


@dataclass(frozen=True)
class WeightGroups:
    """Clustered weights: representatives, multiplicities, and rates."""

    groups: tuple[WeightGroup, ...]
    rel_tol: float = DEFAULT_WEIGHT_RTOL

    def __post_init__(self):
        if not self.groups:
            raise InvalidEvidenceError("must have at least one weight group")
        reps = [g.weight for g in self.groups]
        if reps != sorted(reps):
            raise InvalidEvidenceError("groups must be sorted by ascending weight")
        for lo, hi in zip(reps, reps[1:]):
            # construction keeps representatives at least a linking gap
            # apart; validate with a small margin for cluster-mean shifts
            if hi - lo <= 0.5 * self.rel_tol * hi:
                raise InvalidEvidenceError(
                    f"group weights {lo!r} and {hi!r} are not separated at "
                    f"tolerance {self.rel_tol:g}"
                )

    @property
    def total_count(self) -> int:
        return sum(g.count for g in self.groups)

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(g.weight for g in self.groups)

    @property
    def counts(self) -> tuple[int, ...]:
        return tuple(g.count for g in self.groups)

    def __len__(self) -> int:
        return len(self.groups)

    def __iter__(self):
        return iter(self.groups)


def group_weights(weights, rel_tol: float = DEFAULT_WEIGHT_RTOL) -> WeightGroups:
    """Cluster weights into groups of effectively-identical values.

    Single-linkage on the sorted weights: two adjacent weights join a
    cluster when their gap is within ``rel_tol`` of the larger one.  Each
    cluster is represented by its arithmetic mean.  A cluster whose total
    relative span exceeds 10x the tolerance is ambiguous — the members are
    chained together without genuinely being ties — and raises
    ClusterSpanError rather than guessing.
    """
    ws = [float(w) for w in weights]
    if not ws:
        raise InvalidEvidenceError("weights must be non-empty")
    for w in ws:
        if not (math.isfinite(w) and w > 0.0):
            raise InvalidEvidenceError(f"weights must be positive and finite, got {w!r}")
    if not 0.0 < rel_tol < 1.0:
        raise InvalidEvidenceError(f"rel_tol must be in (0, 1), got {rel_tol!r}")
    ws.sort()
    clusters: list[list[float]] = [[ws[0]]]
    for w in ws[1:]:
        if w - clusters[-1][-1] <= rel_tol * w:
            clusters[-1].append(w)
        else:
            clusters.append([w])
    groups = []
    for members in clusters:
        span = (members[-1] - members[0]) / members[-1]
        if span > _SPAN_FACTOR * rel_tol:
            raise ClusterSpanError(
                f"cluster spanning [{members[0]:g}, {members[-1]:g}] has "
                f"relative span {span:.3g}, beyond {_SPAN_FACTOR:g} x "
                f"rel_tol = {_SPAN_FACTOR * rel_tol:.3g}; clustering is "
                f"ambiguous at this tolerance"
            )
        rep = math.fsum(members) / len(members)
        groups.append(WeightGroup(weight=rep, count=len(members), rate=1.0 / rep))
    return WeightGroups(tuple(groups), rel_tol=rel_tol)


@dataclass(frozen=True)
class PfdCoefficients:
    """Partial-fraction data for the transform of the left-tail function.

    The transform decomposes as  c/s + sum_i sum_{j=1..n_i} c_ij/(s+a_i)^j.
    ``c`` is analytically 1 (the transform's residue at zero) and is set,
    not computed; ``cancellation_gap`` records |1 + sum_i c_i1|, which is
    analytically zero and therefore doubles as a free accuracy diagnostic.

    When any |c_ij| would exceed float range the coefficients are stored as
    (sign, log-magnitude) pairs and ``log_scale`` is True.
    """

    rates: tuple[float, ...]
    multiplicities: tuple[int, ...]
    c: float = 1.0
    coef: tuple[tuple[float, ...], ...] | None = None
    coef_slog: tuple[tuple[tuple[int, float], ...], ...] | None = None
    log_scale: bool = False
    cancellation_gap: float = 0.0

    def signed_logs(self) -> Iterator[tuple[float, int, tuple[int, float]]]:
        """Yield (rate, j, (sign, log|c_ij|)) for every coefficient."""
        if self.log_scale:
            assert self.coef_slog is not None
            for a, row in zip(self.rates, self.coef_slog):
                for j, s in enumerate(row, start=1):
                    yield a, j, s
        else:
            assert self.coef is not None
            for a, row in zip(self.rates, self.coef):
                for j, cij in enumerate(row, start=1):
                    if cij == 0.0:
                        yield a, j, (0, NEG_INF)
                    else:
                        yield a, j, ((1 if cij > 0 else -1), math.log(abs(cij)))


def pfd_coefficients(groups: WeightGroups) -> PfdCoefficients:
    """Compute the partial-fraction coefficients for a set of weight groups.

    Pole by pole: with the order-n_i pole at -a_i factored out, the
    remaining function's Taylor coefficients at -a_i are exactly the c_ij
    (highest j first).  They follow from the log-derivative recursion

        phihat_r = (1/r) * sum_{t<r} phihat_t * psihat_{r-1-t}

    where psihat_u are the scaled derivatives of the logarithmic
    derivative, a plain power sum over the other poles.

    Raises ConditioningError when the analytically-forced invariant
    sum_i c_i1 = -1 is violated beyond 1e-8 — the signature of poles too
    close together for float arithmetic.
    """
    rates = tuple(g.rate for g in groups)
    counts = tuple(g.count for g in groups)
    rows: list[tuple[float, ...]] = []
    overflow = False
    for i in range(len(rates)):
        try:
            taylor = _pole_taylor_float(rates, counts, i)
        except OverflowError:  # float ** and fsum raise rather than go inf
            overflow = True
            break
        if any(not math.isfinite(t) or abs(t) > _OVERFLOW_GUARD for t in taylor):
            overflow = True
            break
        rows.append(tuple(reversed(taylor)))  # j = 1 .. n_i
    if not overflow:
        gap = abs(1.0 + math.fsum(row[0] for row in rows))
        _check_invariant(gap)
        return PfdCoefficients(
            rates=rates,
            multiplicities=counts,
            coef=tuple(rows),
            cancellation_gap=gap,
        )
    slog_rows = []
    for i in range(len(rates)):
        taylor = _pole_taylor_slog(rates, counts, i)
        slog_rows.append(tuple(reversed(taylor)))
    gap_slog = slog_sum([(1, 0.0)] + [row[0] for row in slog_rows])
    gap = math.inf if gap_slog[1] > 700.0 else abs(_exp_or_inf(gap_slog))
    _check_invariant(gap)
    return PfdCoefficients(
        rates=rates,
        multiplicities=counts,
        coef_slog=tuple(slog_rows),
        log_scale=True,
        cancellation_gap=gap,
    )


def _check_invariant(gap: float) -> None:
    if not gap <= _COEFF_INVARIANT_TOL:
        raise ConditioningError(
            f"partial-fraction invariant violated: |1 + sum_i c_i1| = "
            f"{gap:.3g} > {_COEFF_INVARIANT_TOL:g}; the weight groups are "
            f"too close together for this decomposition",
            condition=math.inf,
        )


def _exp_or_inf(s: tuple[int, float]) -> float:
    if s[0] == 0:
        return 0.0
    try:
        return s[0] * math.exp(s[1])
    except OverflowError:
        return s[0] * math.inf


def _pole_taylor_float(rates, counts, i: int) -> list[float]:
    """Scaled Taylor coefficients phihat_0..phihat_{n_i-1} at pole -a_i."""
    ai, ni = rates[i], counts[i]
    phi0 = -(ai ** (ni - 1))
    for m, (am, nm) in enumerate(zip(rates, counts)):
        if m != i:
            phi0 *= (am / (am - ai)) ** nm
    if ni == 1:
        return [phi0]
    psihat = []
    for u in range(ni - 1):
        others = math.fsum(
            nm * (am - ai) ** -(u + 1)
            for m, (am, nm) in enumerate(zip(rates, counts))
            if m != i
        )
        psihat.append(ai ** -(u + 1) - (-1.0) ** u * others)
    phihat = [phi0]
    for r in range(1, ni):
        conv = math.fsum(phihat[t] * psihat[r - 1 - t] for t in range(r))
        phihat.append(conv / r)
    return phihat


def _pole_taylor_slog(rates, counts, i: int) -> list[tuple[int, float]]:
    """Signed-log twin of _pole_taylor_float for out-of-range coefficients."""
    ai, ni = rates[i], counts[i]
    sign = -1
    logmag = (ni - 1) * math.log(ai)
    for m, (am, nm) in enumerate(zip(rates, counts)):
        if m != i:
            diff = am - ai
            if diff < 0 and nm % 2 == 1:
                sign = -sign
            logmag += nm * (math.log(am) - math.log(abs(diff)))
    phi0 = (sign, logmag)
    if ni == 1:
        return [phi0]
    psihat = []
    for u in range(ni - 1):
        parts = [(1, -(u + 1) * math.log(ai))]
        for m, (am, nm) in enumerate(zip(rates, counts)):
            if m == i:
                continue
            diff = am - ai
            s = 1 if diff > 0 else (-1) ** (u + 1)
            s *= -((-1) ** u)
            parts.append((s, math.log(nm) - (u + 1) * math.log(abs(diff))))
        psihat.append(slog_sum(parts))
    phihat = [phi0]
    for r in range(1, ni):
        conv = slog_sum(slog_mul(phihat[t], psihat[r - 1 - t]) for t in range(r))
        phihat.append((conv[0], conv[1] - math.log(r)))
    return phihat


def _tail_terms(v: float, coeffs: PfdCoefficients) -> Iterator[float]:
    """The c_ij/(j-1)! * v^(j-1) * exp(-a_i v) terms of the inverted tail."""
    log_v = math.log(v) if v > 0.0 else NEG_INF
    for a, j, (sign, logmag) in coeffs.signed_logs():
        if sign == 0:
            continue
        if j == 1:
            exponent = logmag - a * v
        elif v == 0.0:
            continue  # v^(j-1) kills every higher-order term at zero
        else:
            exponent = logmag - math.lgamma(j) + (j - 1) * log_v - a * v
        if exponent > 708.0:
            # a single term beyond float range in a sum bounded by 1:
            # cancellation is total, no digits can survive
            raise ConditioningError(
                f"tail term of magnitude exp({exponent:.0f}) at rate {a:g} "
                f"dwarfs the probability it contributes to",
                condition=math.inf,
            )
        yield sign * math.exp(exponent)


def left_tail(v, coeffs: PfdCoefficients, *, policy: ConditioningPolicy = DEFAULT_POLICY) -> float:
    """Left-tail probability P[sum <= v] from partial-fraction coefficients.

    P(v) = c + sum_i sum_j c_ij/(j-1)! * v^(j-1) * exp(-a_i v), with c = 1.
    The complementary right tail (the combined p-value) is 1 - P(v); use
    ``right_tail`` for it directly when v is large, since forming 1 - P in
    floating point wastes digits once P is close to 1.
    """
    v = _check_v(v)
    terms = list(_tail_terms(v, coeffs))
    raw = math.fsum(terms + [coeffs.c])
    abs_sum = math.fsum([abs(t) for t in terms] + [abs(coeffs.c)])
    value, _ = finish_signed_sum(raw, abs_sum, policy=policy, upper=1.0, label="left_tail")
    return value


def right_tail_with_condition(
    v, coeffs: PfdCoefficients, *, policy: ConditioningPolicy = DEFAULT_POLICY
) -> tuple[float, float]:
    """Right-tail probability P[sum >= v] and its cancellation condition.

    Evaluated as the negated coefficient sum rather than 1 - left_tail, so
    small tail probabilities keep full relative precision.
    """
    v = _check_v(v)
    raw, abs_sum = signed_sum(-t for t in _tail_terms(v, coeffs))
    if abs_sum == 0.0:  # no surviving terms: v = 0 with no j = 1 mass
        return 1.0, 1.0
    return finish_signed_sum(raw, abs_sum, policy=policy, upper=1.0, label="right_tail")


def right_tail(v, coeffs: PfdCoefficients, *, policy: ConditioningPolicy = DEFAULT_POLICY) -> float:
    """Right-tail probability P[sum >= v]; see right_tail_with_condition."""
    return right_tail_with_condition(v, coeffs, policy=policy)[0]


def _check_v(v) -> float:
    v = float(v)
    if not v >= 0.0:
        raise ValueError(f"v must be >= 0, got {v!r}")
    return v
