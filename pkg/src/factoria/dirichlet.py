"""High-precision real-axis evaluation of factor-set Dirichlet series.

Everything here returns a SeriesValue: an mpmath real plus a certified
error radius covering both series truncation and accumulated rounding.
The Riemann zeta function and its first two derivatives are computed by
Euler-Maclaurin summation with the classical remainder bound; the prime
zeta function comes from the Moebius-weighted log-zeta identity

    sum_p p^(-s) = sum_{k>=1} (mu(k)/k) log zeta(ks)        (s > 1),

differentiated termwise for orders 1 and 2.  The totient-value series uses
zeta(s) times the Euler product over (1 - p^(-s) + (p-1)^(-s)), truncated
with the telescoping tail bound sum_{p>P0} log f_p <= P0^(-s), minus the
two m < 3 terms.

All functions are pure given (spec, s, ctx); the prime table and Bernoulli
cache are grow-only and idempotent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from mpmath import mp, mpf

from .errors import DomainError, PrecisionUnattainableError
from .factorset import FactorSetSpec, Family, kappa, prime_sieve

EULER_PRODUCT_HARD_CAP = 20_000_000
_EM_MAX_BERNOULLI_ORDER = 60


@dataclass(frozen=True)
class PrecisionContext:
    """Knobs controlling analytic evaluation.

    working_digits is the precision carried through arithmetic; target_digits
    is what results must be certified to.  The three cutoffs are adaptive
    when None; explicit values pin the truncation (useful for reproducible
    finite-difference probes and for families whose adaptive truncation
    would be infeasible at the requested target).
    """

    working_digits: int = 60
    target_digits: int | None = None
    em_cutoff: int | None = None
    euler_product_bound: int | None = None
    mobius_cutoff: int | None = None

    def __post_init__(self):
        tgt = self.resolved_target
        if tgt < 10 or self.working_digits < tgt + 10:
            raise ValueError("need working_digits >= target_digits + 10 >= 20")

    @property
    def resolved_target(self) -> int:
        return self.target_digits if self.target_digits is not None else self.working_digits - 10

    @property
    def dps(self) -> int:
        # extra guard digits for internal cancellation
        return self.working_digits + 10

    def eps(self) -> mpf:
        return mpf(10) ** (-(self.working_digits + 4))


DEFAULT_CONTEXT = PrecisionContext()


@dataclass(frozen=True)
class SeriesValue:
    """A computed real together with a certified absolute error radius."""

    value: mpf
    error_radius: mpf

    def __post_init__(self):
        assert self.error_radius >= 0 and mp.isfinite(self.error_radius)

    def __float__(self) -> float:
        return float(self.value)

    def certified_digits(self) -> int:
        """Significant decimal digits certified by the radius."""
        if self.error_radius == 0:
            return mp.dps
        if self.value == 0:
            return max(0, int(-mp.log10(self.error_radius)))
        rel = self.error_radius / abs(self.value)
        return max(0, int(mp.floor(-mp.log10(rel))))


# -- shared caches ----------------------------------------------------------

_LN_CACHE: dict[tuple[int, int], mpf] = {}
_PRIMES: list[int] = []


def _ln(n: int) -> mpf:
    key = (n, mp.prec)
    v = _LN_CACHE.get(key)
    if v is None:
        v = mp.log(n)
        _LN_CACHE[key] = v
    return v


@lru_cache(maxsize=None)
def _bernoulli_frac(n: int) -> tuple[int, int]:
    """Bernoulli number B_n as an exact (numerator, denominator) pair."""
    p, q = mp.bernfrac(n)
    return int(p), int(q)


def primes_list(bound: int) -> list[int]:
    """Grow-only shared prime table covering [2, bound]."""
    global _PRIMES
    if not _PRIMES or _PRIMES[-1] < bound:
        _PRIMES = [int(p) for p in np.flatnonzero(prime_sieve(max(bound, 1000)))]
    import bisect

    return _PRIMES[: bisect.bisect_right(_PRIMES, bound)]


# -- Moebius ----------------------------------------------------------------


def mobius(k: int) -> int:
    """Moebius function by trial-division factorization (k stays small)."""
    if k < 1:
        raise ValueError("mobius needs k >= 1")
    result = 1
    d = 2
    while d * d <= k:
        if k % d == 0:
            k //= d
            if k % d == 0:
                return 0
            result = -result
        d += 1
    if k > 1:
        result = -result
    return result


# -- Euler-Maclaurin zeta ---------------------------------------------------


def _zeta_em_terms(s: mpf, M: int, J: int) -> tuple[list[mpf], list[mpf], list[mpf], mpf]:
    """Euler-Maclaurin pieces of zeta(s) and their first two s-derivatives.

    Returns (values, d1, d2, next_term_magnitude) where each list holds the
    assembled order-0/1/2 sums and next_term_magnitude is the magnitude of
    the first omitted Bernoulli correction (order 0), which bounds the
    truncation remainder for real s.
    """
    v0 = mpf(0)
    v1 = mpf(0)
    v2 = mpf(0)
    for n in range(1, M):
        ln = _ln(n) if n > 1 else mpf(0)
        t = mp.exp(-s * ln) if n > 1 else mpf(1)
        v0 += t
        v1 -= ln * t
        v2 += ln * ln * t

    lnM = _ln(M)
    Mms = mp.exp(-s * lnM)

    # integral tail M^(1-s)/(s-1)
    T = Mms * M / (s - 1)
    c = lnM + 1 / (s - 1)
    v0 += T
    v1 += -c * T
    v2 += (c * c + (s - 1) ** -2) * T

    # half term M^(-s)/2
    H = Mms / 2
    v0 += H
    v1 += -lnM * H
    v2 += lnM * lnM * H

    # Bernoulli corrections C_j = B_2j/(2j)! * s(s+1)...(s+2j-2) * M^(-s-2j+1)
    poch = mpf(1)      # rising factorial s(s+1)...(s+i-1)
    u = mpf(0)         # d/ds log poch = sum 1/(s+i)
    up = mpf(0)        # second log-derivative piece: -sum 1/(s+i)^2
    i = 0
    Mpow = Mms * M     # M^(-s-2j+1) for the current j
    for j in range(1, J + 1):
        while i < 2 * j - 1:
            poch *= s + i
            u += 1 / (s + i)
            up -= (s + i) ** -2
            i += 1
        Mpow = Mms * mp.power(M, 1 - 2 * j)
        bp, bq = _bernoulli_frac(2 * j)
        coef = mpf(bp) / (bq * mp.factorial(2 * j))
        C = coef * poch * Mpow
        g = u - lnM
        v0 += C
        v1 += C * g
        v2 += C * (g * g + up)

    # magnitude of the first omitted correction term (j = J+1)
    while i < 2 * (J + 1) - 1:
        poch *= s + i
        i += 1
    bp, bq = _bernoulli_frac(2 * (J + 1))
    nxt = abs(mpf(bp) / (bq * mp.factorial(2 * (J + 1))) * poch * Mms * mp.power(M, -2 * J - 1))
    return [v0, v1, v2], nxt


def _zeta_all_orders(s: mpf, ctx: PrecisionContext) -> tuple[list[SeriesValue], None]:
    eps = ctx.eps()
    M = ctx.em_cutoff if ctx.em_cutoff is not None else max(10, int(0.9 * ctx.dps) + 2)
    attempts = 0
    while True:
        # pick J adaptively for this M by scanning omitted-term magnitudes
        J = None
        lnM = mp.log(M)
        for j in range(1, _EM_MAX_BERNOULLI_ORDER // 2):
            bp, bq = _bernoulli_frac(2 * (j + 1))
            # coarse magnitude of term j+1 (poch ~ (s+2j)!/s-ish bounded by (|s|+2j+1)^(2j+1))
            logmag = (
                math.log(abs(bp) / bq) - math.lgamma(2 * j + 3)
                + (2 * j + 1) * math.log(abs(float(s)) + 2 * j + 2)
                + float(-(float(s) + 2 * j + 1) * lnM)
            )
            if logmag < float(mp.log(eps)):
                J = j
                break
        if J is not None or ctx.em_cutoff is not None:
            J = J if J is not None else _EM_MAX_BERNOULLI_ORDER // 2 - 1
            sums, nxt = _zeta_em_terms(s, M, J)
            # remainder bound for real s: first omitted term; x4 covers the
            # termwise-differentiated remainders (log factors absorbed)
            lnM2 = mp.log(M)
            rad0 = 4 * nxt
            rad1 = 4 * nxt * (lnM2 + 2 * J + 4)
            rad2 = 4 * nxt * (lnM2 + 2 * J + 4) ** 2
            if rad0 <= eps * max(1, abs(sums[0])) or ctx.em_cutoff is not None:
                rnd = (M + J + 8) * mpf(10) ** (-(ctx.dps - 2))
                return [
                    SeriesValue(sums[0], rad0 + rnd * (abs(sums[0]) + 1)),
                    SeriesValue(sums[1], rad1 + rnd * (abs(sums[1]) + 1)),
                    SeriesValue(sums[2], rad2 + rnd * (abs(sums[2]) + 1)),
                ], None
        M *= 2
        attempts += 1
        if attempts > 12:
            raise PrecisionUnattainableError(
                f"Euler-Maclaurin zeta cannot certify {ctx.resolved_target} digits at s={float(s)}"
            )


def zeta(s, ctx: PrecisionContext = DEFAULT_CONTEXT, order: int = 0) -> SeriesValue:
    """zeta(s), zeta'(s) or zeta''(s) for real s > 1, certified."""
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    with mp.workdps(ctx.dps):
        s = mpf(s)
        if not s > 1:
            raise DomainError("zeta evaluation restricted to real s > 1")
        vals, _ = _zeta_all_orders(s, ctx)
        return vals[order]


def _zeta_triple(s: mpf, ctx: PrecisionContext) -> tuple[SeriesValue, SeriesValue, SeriesValue]:
    vals, _ = _zeta_all_orders(s, ctx)
    return vals[0], vals[1], vals[2]


# -- prime zeta -------------------------------------------------------------


def prime_zeta(s, ctx: PrecisionContext = DEFAULT_CONTEXT, order: int = 0) -> SeriesValue:
    """sum over primes p of p^(-s) (and s-derivatives) for real s > 1."""
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    with mp.workdps(ctx.dps):
        s = mpf(s)
        if not s > 1:
            raise DomainError("prime zeta needs s > 1")
        return _prime_zeta_all(s, ctx)[order]


def _prime_zeta_all(s: mpf, ctx: PrecisionContext) -> tuple[SeriesValue, SeriesValue, SeriesValue]:
    eps = ctx.eps()
    if ctx.mobius_cutoff is not None:
        K = ctx.mobius_cutoff
    else:
        # 2^(-Ks)/K below eps terminates the sum
        K = int((ctx.working_digits + 6) * math.log(10) / (float(s) * math.log(2))) + 2
    v0 = mpf(0)
    v1 = mpf(0)
    v2 = mpf(0)
    rad = mpf(0)
    for k in range(1, K + 1):
        mu = mobius(k)
        if mu == 0:
            continue
        z0, z1, z2 = _zeta_triple(k * s, ctx)
        v0 += mu * mp.log(z0.value) / k
        v1 += mu * z1.value / z0.value
        v2 += mu * k * (z2.value * z0.value - z1.value**2) / z0.value**2
        # propagate zeta radii (z0 close to 1 for k >= 2, denominators safe)
        rad += (z0.error_radius + z1.error_radius + z2.error_radius) * (k + 2)
    # geometric tails: |log zeta(x)| <= 3*2^(-x) etc. for x = ks >= 3
    t = mp.power(2, -(K + 1) * s)
    tail0 = 6 * t / (K + 1)
    tail1 = 12 * t
    tail2 = 48 * (K + 1) * t
    rnd = (3 * K + 8) * mpf(10) ** (-(ctx.dps - 2))
    return (
        SeriesValue(v0, tail0 + rad + rnd * (abs(v0) + 1)),
        SeriesValue(v1, tail1 + rad + rnd * (abs(v1) + 1)),
        SeriesValue(v2, tail2 + rad + rnd * (abs(v2) + 1)),
    )


# -- family dispatch --------------------------------------------------------


def eval_P(spec: FactorSetSpec, s, ctx: PrecisionContext = DEFAULT_CONTEXT) -> SeriesValue:
    """P(s) = sum over the factor multiset of w(q) q^(-s)."""
    return eval_P_derivs(spec, s, ctx)[0]


def eval_P_derivs(
    spec: FactorSetSpec, s, ctx: PrecisionContext = DEFAULT_CONTEXT
) -> tuple[SeriesValue, SeriesValue, SeriesValue]:
    """(P(s), P'(s), P''(s)) with certified radii, dispatched per family."""
    with mp.workdps(ctx.dps):
        s = mpf(s)
        _check_domain(spec, s)
        f = spec.family
        if f in (Family.EXPLICIT, Family.WEIGHTED):
            return _finite_sum_derivs(spec, s, ctx)
        if f is Family.ALL_INTEGERS:
            z0, z1, z2 = _zeta_triple(s, ctx)
            return (
                SeriesValue(z0.value - 1, z0.error_radius),
                z1,
                z2,
            )
        if f is Family.PRIMES:
            return _prime_zeta_all(s, ctx)
        if f is Family.SQUAREFREE:
            return _squarefree_derivs(s, ctx)
        if f is Family.TOTIENT:
            return _totient_derivs(s, ctx)
        if f is Family.POWERS_OF:
            return _powers_derivs(spec.base, s, ctx)
        raise AssertionError(f)


def _check_domain(spec: FactorSetSpec, s: mpf) -> None:
    k = kappa(spec)
    if math.isfinite(k) and not s > k:
        raise DomainError(f"s={float(s)} is not right of the convergence abscissa {k}")


def _finite_sum_derivs(spec, s, ctx):
    if spec.family is Family.EXPLICIT:
        pairs = [(q, 1) for q in spec.members]
    else:
        pairs = list(spec.weights)
    v0 = mpf(0)
    v1 = mpf(0)
    v2 = mpf(0)
    for q, w in pairs:
        ln = _ln(q)
        t = w * mp.exp(-s * ln)
        v0 += t
        v1 -= ln * t
        v2 += ln * ln * t
    rnd = (len(pairs) + 4) * mpf(10) ** (-(ctx.dps - 2))
    return (
        SeriesValue(v0, rnd * (abs(v0) + 1)),
        SeriesValue(v1, rnd * (abs(v1) + 1)),
        SeriesValue(v2, rnd * (abs(v2) + 1)),
    )


def _squarefree_derivs(s, ctx):
    # P = zeta(s)/zeta(2s) - 1, chain rule for the inner 2s
    F0, F1, F2 = _zeta_triple(s, ctx)
    G0, G1, G2 = _zeta_triple(2 * s, ctx)
    F, Fp, Fpp = F0.value, F1.value, F2.value
    G = G0.value
    Gs = 2 * G1.value
    Gss = 4 * G2.value
    v0 = F / G - 1
    v1 = Fp / G - F * Gs / G**2
    v2 = Fpp / G - 2 * Fp * Gs / G**2 + 2 * F * Gs**2 / G**3 - F * Gss / G**2
    # crude but safe linear propagation (G > 1 on the domain)
    rF = F0.error_radius + F1.error_radius + F2.error_radius
    rG = G0.error_radius + G1.error_radius + G2.error_radius
    scale = (abs(F) + abs(Fp) + abs(Fpp) + 1) / G
    rad = (rF + rG) * (3 + 3 * scale + 3 * abs(Gs) + abs(Gss))
    return (
        SeriesValue(v0, rad),
        SeriesValue(v1, rad),
        SeriesValue(v2, rad),
    )


def _totient_derivs(s, ctx):
    eps_t = mpf(10) ** (-(ctx.resolved_target + 2))
    if ctx.euler_product_bound is not None:
        P0 = ctx.euler_product_bound
    else:
        P0 = int(mp.power(10, mpf(ctx.resolved_target + 2) / s)) + 1
        if P0 > EULER_PRODUCT_HARD_CAP:
            raise PrecisionUnattainableError(
                f"totient Euler product needs primes to {P0:.3g} for "
                f"{ctx.resolved_target} digits at s={float(s)}; set an explicit "
                "euler_product_bound to accept a larger certified radius"
            )
    Z0, Z1, Z2 = _zeta_triple(s, ctx)
    E = mpf(1)
    L1 = mpf(0)
    L2 = mpf(0)
    for p in primes_list(P0):
        lp = _ln(p)
        lp1 = _ln(p - 1) if p > 2 else mpf(0)
        a = mp.exp(-s * lp)
        b = mp.exp(-s * lp1) if p > 2 else mpf(1)
        fp = 1 - a + b
        f1 = lp * a - lp1 * b
        f2 = -lp * lp * a + lp1 * lp1 * b
        E *= fp
        L1 += f1 / fp
        L2 += (f2 * fp - f1 * f1) / fp**2
    Z, Zp, Zpp = Z0.value, Z1.value, Z2.value
    v0 = Z * E - 2
    v1 = E * (Zp + Z * L1)
    v2 = E * (Zpp + 2 * Zp * L1 + Z * (L1 * L1 + L2))
    # telescoping tail of the log-product: sum_{p>P0} log f_p in [0, P0^-s]
    t0 = mp.power(P0, -s)
    lnP0 = mp.log(P0)
    tail0 = abs(Z * E) * 2 * t0
    tail1 = abs(v1) * 2 * t0 + abs(Z * E) * 3 * (lnP0 + 2) * t0
    tail2 = abs(v2) * 2 * t0 + abs(Z * E) * 6 * (lnP0 + 2) ** 2 * t0
    rz = Z0.error_radius + Z1.error_radius + Z2.error_radius
    nprimes = len(primes_list(P0))
    rnd = (nprimes + 8) * mpf(10) ** (-(ctx.dps - 2))
    scale = abs(E) * (1 + abs(L1) + abs(L1) ** 2 + abs(L2))
    return (
        SeriesValue(v0, tail0 + rz * abs(E) + rnd * (abs(v0) + 1)),
        SeriesValue(v1, tail1 + rz * scale + rnd * (abs(v1) + 1)),
        SeriesValue(v2, tail2 + rz * scale + rnd * (abs(v2) + 1)),
    )


def _powers_derivs(d, s, ctx):
    # geometric series: P = x/(1-x), x = d^(-s)
    if not s > 0:
        raise DomainError("powers family needs s > 0")
    ld = _ln(d)
    x = mp.exp(-s * ld)
    one_m = 1 - x
    v0 = x / one_m
    v1 = -ld * x / one_m**2
    v2 = ld * ld * x * (1 + x) / one_m**3
    rnd = 8 * mpf(10) ** (-(ctx.dps - 2))
    return (
        SeriesValue(v0, rnd * (abs(v0) + 1)),
        SeriesValue(v1, rnd * (abs(v1) + 1)),
        SeriesValue(v2, rnd * (abs(v2) + 1)),
    )


# -- finite-difference oracle (test use only) -------------------------------


def fd_derivs(spec: FactorSetSpec, s, ctx: PrecisionContext) -> tuple[mpf, mpf]:
    """(P'(s), P''(s)) by Richardson-extrapolated central differences.

    Test oracle only: validates the hand-derived analytic formulas.  Uses
    step 10^(-working_digits/3) so truncation and rounding both sit far
    below the comparison tolerance.  The ctx should pin explicit truncation
    cutoffs so that P is evaluated as one fixed smooth function.
    """
    with mp.workdps(ctx.dps):
        s = mpf(s)
        h = mp.power(10, -mpf(ctx.working_digits) / 3)

        def P(x):
            return eval_P(spec, x, ctx).value

        def d1(step):
            return (P(s + step) - P(s - step)) / (2 * step)

        def d2(step):
            return (P(s + step) - 2 * P(s) + P(s - step)) / step**2

        r1 = (4 * d1(h / 2) - d1(h)) / 3
        r2 = (4 * d2(h / 2) - d2(h)) / 3
        return r1, r2
