"""Roots of P(s) = target and the normal-limit constants derived from them.

The growth exponent rho is the unique real root of P(rho) = 1 right of
max(kappa, 0); drift and diffusion constants follow from the first two
derivatives there:

    mu = -1/P'(rho),   sigma^2 = mu^3 P''(rho) - mu,   R = mu/rho.

P is strictly decreasing and convex on the real axis (nonnegative
coefficients), so a doubling/halving bracket plus safeguarded Newton is
globally convergent.  Every returned root carries a certified radius
|P(x) - target| / (|P'(x)| - radii), i.e. a rigorous residual bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from mpmath import mp, mpf

from .dirichlet import DEFAULT_CONTEXT, PrecisionContext, SeriesValue, eval_P_derivs
from .errors import DomainError, FactoriaError, NoRootError
from .factorset import FactorSetSpec, kappa


@dataclass(frozen=True)
class SpectralConstants:
    """All closed-form constants of one factor set's normal limit law."""

    spec: FactorSetSpec
    kappa: float
    rho: mpf
    P1: mpf              # P'(rho)
    P2: mpf              # P''(rho)
    mu: mpf
    sigma2: mpf
    R: mpf               # mu/rho, the partial-sum constant A(N) ~ R N^rho
    B2_at_rho: mpf       # sigma^2/mu
    B1prime_at_rho: mpf  # sigma^2/mu^2
    radii: dict = field(default_factory=dict, compare=False)

    def certified_digits(self) -> int:
        worst = 0
        for name in ("rho", "mu", "sigma2"):
            val = getattr(self, name)
            rad = self.radii.get(name, mpf(0))
            if rad == 0:
                continue
            rel = rad / abs(val)
            digits = int(mp.floor(-mp.log10(rel))) if rel > 0 else mp.dps
            worst = digits if worst == 0 else min(worst, digits)
        return worst


@dataclass(frozen=True)
class DelangeQuery:
    """Inputs of the Tauberian partial-sum prediction for one pole."""

    varrho: float
    beta: float
    G_at_varrho: float
    N: int

    def __post_init__(self):
        if not (self.varrho > 0 and self.beta > 0 and self.N >= 2):
            raise ValueError("need varrho > 0, beta > 0, N >= 2")


class ConsistencyError(FactoriaError):
    """An exact identity failed beyond tolerance (root or derivative bug)."""


# -- root finding -----------------------------------------------------------


def _solve_P_equals(
    spec: FactorSetSpec,
    target: mpf,
    ctx: PrecisionContext,
    lower: float,
) -> SeriesValue:
    """Unique root of P(s) = target on (lower, oo), certified.

    `lower` is max(kappa, 0) for the growth exponent and kappa itself for
    shifted roots; -inf means the series converges everywhere.
    """

    def P(s):
        return eval_P_derivs(spec, s, ctx)

    finite_lower = math.isfinite(lower)
    lo_limit = mpf(lower) if finite_lower else None

    # upper end: P(s) -> 0 as s -> oo, so doubling always lands below target
    hi = (lo_limit + 1) if finite_lower else mpf(1)
    for _ in range(80):
        if P(hi)[0].value < target:
            break
        hi = lo_limit + 2 * (hi - lo_limit) if finite_lower else hi * 2 + 1
    else:
        raise NoRootError(f"P stayed >= {float(target)} out to s={float(hi)}")

    # lower end: slide toward the abscissa until P exceeds target
    lo = hi
    supremum = P(hi)[0].value
    found = False
    for _ in range(240):
        lo = lo_limit + (lo - lo_limit) / 2 if finite_lower else lo - max(1, abs(lo)) * 2
        val = P(lo)[0].value
        supremum = max(supremum, val)
        if val > target:
            found = True
            break
    if not found:
        raise NoRootError(
            f"P(s) never exceeds {float(target)} on the domain of {spec} "
            f"(supremum found {float(supremum):.6g})",
            supremum=supremum,
        )

    # bisect to a comfortably small bracket, then safeguarded Newton
    while hi - lo > mpf("0.5"):
        mid = (lo + hi) / 2
        if P(mid)[0].value > target:
            lo = mid
        else:
            hi = mid

    x = (lo + hi) / 2
    tol = mpf(10) ** (-(ctx.resolved_target + 6))
    last = None
    for _ in range(ctx.working_digits + 60):
        p0, p1, _ = P(x)
        f = p0.value - target
        if f > 0:
            lo = max(lo, x)
        else:
            hi = min(hi, x)
        step = f / p1.value
        nxt = x - step
        if not (lo < nxt < hi):
            nxt = (lo + hi) / 2
        if abs(nxt - x) <= tol * max(1, abs(x)):
            x = nxt
            break
        last, x = x, nxt

    p0, p1, _ = P(x)
    denom = abs(p1.value) - p1.error_radius
    if denom <= 0:
        raise NoRootError("derivative too small to certify the root")
    radius = (abs(p0.value - target) + p0.error_radius) / denom
    return SeriesValue(x, radius)


def solve_rho(spec: FactorSetSpec, ctx: PrecisionContext = DEFAULT_CONTEXT) -> SeriesValue:
    """The growth exponent: unique root of P(s) = 1 right of max(kappa, 0)."""
    with mp.workdps(ctx.dps):
        return _solve_P_equals(spec, mpf(1), ctx, lower=max(kappa(spec), 0.0))


def shifted_rho(spec: FactorSetSpec, z, ctx: PrecisionContext = DEFAULT_CONTEXT) -> SeriesValue:
    """rho(z): root of P(s) = exp(-z) on (kappa, oo); rho(0) is rho exactly."""
    with mp.workdps(ctx.dps):
        z = mpf(z)
        if z == 0:
            return solve_rho(spec, ctx)
        return _solve_P_equals(spec, mp.exp(-z), ctx, lower=kappa(spec))


# -- the constants ----------------------------------------------------------


def spectral_constants(spec: FactorSetSpec, ctx: PrecisionContext = DEFAULT_CONTEXT) -> SpectralConstants:
    """Solve for rho and assemble mu, sigma^2, R with propagated radii."""
    with mp.workdps(ctx.dps):
        root = solve_rho(spec, ctx)
        rho = root.value
        p0, p1, p2 = eval_P_derivs(spec, rho, ctx)

        mu = -1 / p1.value
        sigma2 = mu**3 * p2.value - mu
        R = mu / rho

        # exact identity B1(rho) = P(rho) + mu P'(rho) = 0; with mu computed
        # from the same P' this reduces to the root residual
        b1 = p0.value + mu * p1.value
        tol = mpf(10) ** (-(ctx.resolved_target - 5)) * abs(mu)
        if abs(b1) > tol:
            raise ConsistencyError(
                f"B1(rho) = {float(b1):.3e} exceeds tolerance {float(tol):.3e}"
            )
        if not mu > 0:
            raise ConsistencyError("mu must be positive")
        if not sigma2 > 0:
            raise ConsistencyError("sigma^2 must be positive")

        # coarse third derivative for transporting the rho radius into P''
        h = mpf("1e-5")
        try:
            lo_ctx = PrecisionContext(
                working_digits=30,
                target_digits=12,
                em_cutoff=ctx.em_cutoff,
                euler_product_bound=ctx.euler_product_bound,
                mobius_cutoff=ctx.mobius_cutoff,
            )
            p2a = eval_P_derivs(spec, rho + h, lo_ctx)[2].value
            p2b = eval_P_derivs(spec, rho - h, lo_ctx)[2].value
            p3_mag = abs((p2a - p2b) / (2 * h))
        except FactoriaError:
            p3_mag = abs(p2.value) * 10

        drho = root.error_radius
        r1 = p1.error_radius + abs(p2.value) * drho
        r2 = p2.error_radius + p3_mag * drho
        dmu = mu**2 * r1
        dsig = abs(3 * mu**2 * p2.value - 1) * dmu + abs(mu) ** 3 * r2
        dR = dmu / rho + abs(mu) * drho / rho**2
        safety = 4
        radii = {
            "rho": safety * drho,
            "P1": safety * r1,
            "P2": safety * r2,
            "mu": safety * dmu,
            "sigma2": safety * dsig,
            "R": safety * dR,
        }
        return SpectralConstants(
            spec=spec,
            kappa=kappa(spec),
            rho=rho,
            P1=p1.value,
            P2=p2.value,
            mu=mu,
            sigma2=sigma2,
            R=R,
            B2_at_rho=sigma2 / mu,
            B1prime_at_rho=sigma2 / mu**2,
            radii=radii,
        )


# -- closed-form predictions ------------------------------------------------


def pole_coefficient_ck(constants: SpectralConstants, k: int) -> mpf:
    """c_k = mu (sigma^2/2)^(k/2) k! for even k >= 0 (c_0 is mu itself)."""
    if k < 0 or k % 2 != 0:
        raise ValueError("pole coefficients are defined for even k >= 0")
    if k == 0:
        return constants.mu
    with mp.extradps(40):
        return constants.mu * (constants.sigma2 / 2) ** (k // 2) * mp.factorial(k)


def delange_prediction(q: DelangeQuery) -> mpf:
    """Partial-sum prediction G/(varrho Gamma(beta)) N^varrho (log N)^(beta-1)."""
    varrho = mpf(q.varrho)
    beta = mpf(q.beta)
    G = mpf(q.G_at_varrho)
    logN = mp.log(q.N)
    return G / (varrho * mp.gamma(beta)) * mp.power(q.N, varrho) * mp.power(logN, beta - 1)


def gaussian_moment(k: int) -> int:
    """Standard normal moment: k!/((k/2)! 2^(k/2)) for even k, 0 for odd."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k % 2 == 1:
        return 0
    return math.factorial(k) // (math.factorial(k // 2) * 2 ** (k // 2))


def absolute_moment_prediction(constants: SpectralConstants, beta, N: int) -> mpf:
    """Predicted E|Y_N - mu log N|^beta for real beta >= 0."""
    beta = mpf(beta)
    if beta < 0 or N < 2:
        raise ValueError("need beta >= 0 and N >= 2")
    sig = mp.sqrt(constants.sigma2)
    return (
        mp.power(sig, beta)
        * mp.power(2, beta / 2)
        / mp.sqrt(mp.pi)
        * mp.gamma((beta + 1) / 2)
        * mp.power(mp.log(N), beta / 2)
    )


def mgf_prediction(spec: FactorSetSpec, z, N: int, ctx: PrecisionContext = DEFAULT_CONTEXT) -> mpf:
    """Predicted E(exp(z Y_N)): the shifted-root ratio times N^(rho(z)-rho)."""
    with mp.workdps(ctx.dps):
        z = mpf(z)
        rho = solve_rho(spec, ctx).value
        rho_z = shifted_rho(spec, z, ctx).value
        p1_at_rho = eval_P_derivs(spec, rho, ctx)[1].value
        p1_at_rho_z = eval_P_derivs(spec, rho_z, ctx)[1].value
        return (
            (rho * p1_at_rho)
            / (rho_z * mp.exp(z) * p1_at_rho_z)
            * mp.power(N, rho_z - rho)
        )
