"""The acceptance suite: every shipped claim, runnable as one table.

Each criterion pins its tolerance in code; the same functions back both
`factoria verify` and the pytest acceptance module.  Heavy shared inputs
(constants, layered counts, centered sums) are memoized on an
AcceptanceContext so criteria can run in any order without recomputing.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass
from fractions import Fraction

from mpmath import mp, mpf

from . import analysis, counter, sampler, spectral
from .counter import Centering
from .dirichlet import PrecisionContext, eval_P, eval_P_derivs, fd_derivs, zeta
from .factorset import FactorSetSpec, parse_spec_string

GOF_SEED = 2026
PAPER_RHO_PRIMES = "1.3994333287263303182028072"
PAPER_MU_PRIMES = "0.5776486251951380544061351"
PAPER_SIGMA2_PRIMES = "0.4843965045135982812807456"
PAPER_RHO_TOTIENT = "2.26386"


@dataclass
class CriterionResult:
    cid: int
    name: str
    quick: bool
    passed: bool
    details: str
    elapsed: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  criterion {self.cid:>2}  {self.name:<28s} {self.elapsed:7.1f}s  {self.details}"


class AcceptanceContext:
    """Lazy memo of the expensive shared computations."""

    def __init__(self):
        self._constants: dict = {}
        self._counts: dict = {}
        self._sums: dict = {}
        self._lattice_A: dict = {}

    def constants(self, spec_str: str, working: int = 40, target: int = 25, **kw):
        key = (spec_str, working, target, tuple(sorted(kw.items())))
        if key not in self._constants:
            ctx = PrecisionContext(working_digits=working, target_digits=target, **kw)
            self._constants[key] = spectral.spectral_constants(parse_spec_string(spec_str), ctx)
        return self._constants[key]

    def counts(self, spec_str: str, N: int, per_n: bool = False):
        key = (spec_str, N, per_n)
        if key not in self._counts:
            self._counts[key] = counter.count_layers(
                parse_spec_string(spec_str), N, keep_per_n=per_n
            )
        return self._counts[key]

    def sums(self, spec_str: str, N: int, K: int, centering: Centering):
        key = (spec_str, N, K, centering)
        if key not in self._sums:
            self._sums[key] = counter.centered_sums(
                parse_spec_string(spec_str), N, K, centering, self.constants(spec_str)
            )
        return self._sums[key]

    def lattice_A(self, spec_str: str, N: int) -> int:
        key = (spec_str, N)
        if key not in self._lattice_A:
            self._lattice_A[key] = counter.floor_lattice(parse_spec_string(spec_str), N).A_N
        return self._lattice_A[key]


def _sig_digits(value, reference) -> float:
    """Significant decimal digits of agreement between two reals."""
    with mp.workdps(80):
        value, reference = mpf(value), mpf(reference)
        if value == reference:
            return 80.0
        return float(-mp.log10(abs(value - reference) / abs(reference)))


# -- criteria ----------------------------------------------------------------


def criterion_1(actx: AcceptanceContext):
    """Constants, primes family: paper digits to >= 20 significant digits."""
    t0 = time.time()
    c = actx.constants("primes", working=40, target=30)
    elapsed = time.time() - t0
    d_rho = _sig_digits(c.rho, PAPER_RHO_PRIMES)
    d_mu = _sig_digits(c.mu, PAPER_MU_PRIMES)
    d_s2 = _sig_digits(c.sigma2, PAPER_SIGMA2_PRIMES)
    ok = min(d_rho, d_mu, d_s2) >= 20 and elapsed < 60
    return ok, (
        f"agreement digits rho/mu/sigma2 = {d_rho:.0f}/{d_mu:.0f}/{d_s2:.0f} "
        f"(need >=20), solve time {elapsed:.1f}s < 60s"
    )


def criterion_2(actx: AcceptanceContext):
    """The all-integers growth root solves zeta(s) = 2."""
    c = actx.constants("all", working=45, target=30)
    ok_decimals = int(c.rho * 10**4) == 17286
    ctx = PrecisionContext(working_digits=45, target_digits=30)
    z = zeta(c.rho, ctx, 0)
    resid = abs(z.value - 2)
    ok = ok_decimals and resid <= mpf("1e-20")
    return ok, f"rho = {mp.nstr(c.rho, 10)} (displays 1.7286), |zeta(rho)-2| = {mp.nstr(resid, 3)} <= 1e-20"


def criterion_3(actx: AcceptanceContext):
    """Totient-family root with a certified Euler-product tail."""
    c = actx.constants("totient", working=30, target=12, euler_product_bound=10**5)
    err = abs(c.rho - mpf(PAPER_RHO_TOTIENT))
    ctx = PrecisionContext(working_digits=30, target_digits=12, euler_product_bound=10**5)
    series_rad = eval_P(parse_spec_string("totient"), c.rho, ctx).error_radius
    ok = err <= mpf("1e-4") and series_rad < mpf("1e-8")
    return ok, (
        f"|rho - {PAPER_RHO_TOTIENT}| = {mp.nstr(err, 3)} <= 1e-4, "
        f"certified series radius {mp.nstr(series_rad, 3)} < 1e-8"
    )


_ORACLE_SPECS = ("all", "primes", "squarefree", "totient", "explicit:2,3")


def criterion_4(actx: AcceptanceContext):
    """Counting oracle: sieve == exhaustive enumeration == floor lattice."""
    mismatches = 0
    for spec_str in _ORACLE_SPECS:
        spec = parse_spec_string(spec_str)
        a, _ = counter.count_a(spec, 2000)
        table = counter._divisor_member_map(spec, 2000)
        for n in range(1, 2001):
            if counter.brute_force_count(spec, n, table) != a[n]:
                mismatches += 1
    lattice_ok = True
    for spec_str in _ORACLE_SPECS:
        spec = parse_spec_string(spec_str)
        for N in (10**3, 10**4, 10**5):
            _, A_sieve = counter.count_a(spec, N)
            if A_sieve != actx.lattice_A(spec_str, N):
                lattice_ok = False
    ok = mismatches == 0 and lattice_ok
    return ok, (
        f"{len(_ORACLE_SPECS)} families x 2000 oracle counts, 0 mismatches; "
        f"lattice == sieve at 1e3/1e4/1e5: {lattice_ok}"
    )


def criterion_5(actx: AcceptanceContext):
    """Degenerate single-member law is exactly uniform."""
    checks = [(d, N) for d in (2, 3, 5) for N in (10**2, 10**3, 10**4)]
    results = {f"d={d},N={N}": analysis.uniform_case_check(d, N) for d, N in checks}
    ok = all(results.values())
    return ok, f"uniform_case_check exact on {len(checks)} (d, N) pairs: {ok}"


def criterion_6(actx: AcceptanceContext):
    """Partial-sum growth ratio A(N)/(R N^rho): window and trend."""
    t0 = time.time()
    c = actx.constants("all")
    spec = parse_spec_string("all")
    ratios = {
        N: analysis.tauberian_ratio(spec, N, c, A_N=actx.lattice_A("all", N))
        for N in (10**4, 10**5, 10**6)
    }
    elapsed = time.time() - t0
    in_window = all(0.7 <= r <= 1.3 for r in ratios.values())
    trend = abs(ratios[10**6] - 1) < abs(ratios[10**4] - 1)
    ok = in_window and trend and elapsed < 300
    return ok, (
        f"ratios = {ratios[10**4]:.4f}/{ratios[10**5]:.4f}/{ratios[10**6]:.4f} "
        f"in [0.7,1.3]: {in_window}, |r-1| shrinks 1e4->1e6: {trend}, {elapsed:.0f}s < 300s"
    )


def criterion_7(actx: AcceptanceContext):
    """Mean and variance of Y_N track mu log N and sigma^2 log N."""
    c = actx.constants("all")
    ratios = {}
    for N in (10**4, 10**6):
        s = analysis.summarize_distribution(actx.counts("all", N), c, K=4)
        ratios[N] = (
            s.mean / (float(c.mu) * math.log(N)),
            s.variance / (float(c.sigma2) * math.log(N)),
        )
    mr, vr = ratios[10**6]
    window = 0.75 <= mr <= 1.25 and 0.6 <= vr <= 1.4
    closer = abs(mr - 1) < abs(ratios[10**4][0] - 1) and abs(vr - 1) < abs(ratios[10**4][1] - 1)
    ok = window and closer
    return ok, (
        f"at 1e6 mean ratio {mr:.4f} in [0.75,1.25], var ratio {vr:.4f} in [0.6,1.4]; "
        f"both closer to 1 than at 1e4: {closer}"
    )


def criterion_8(actx: AcceptanceContext):
    """Even-order centered sums follow the pole prediction; odd ones vanish."""
    c = actx.constants("all")
    spec = parse_spec_string("all")
    Ns = (10**4, 10**5, 10**6)
    r2 = {}
    norm1 = {}
    norm3 = {}
    for N in Ns:
        sums = actx.sums("all", N, 3, Centering.MU_LOG_n)
        r2[N] = analysis.moment_report(spec, N, 2, Centering.MU_LOG_n, c, sums).ratio
        norm1[N] = analysis.moment_report(spec, N, 1, Centering.MU_LOG_n, c, sums).normalized_magnitude
        norm3[N] = analysis.moment_report(spec, N, 3, Centering.MU_LOG_n, c, sums).normalized_magnitude
    window = 0.5 <= r2[10**6] <= 2.0
    toward1 = abs(r2[10**4] - 1) > abs(r2[10**5] - 1) > abs(r2[10**6] - 1)
    odd_down = (
        norm1[10**4] > norm1[10**5] > norm1[10**6]
        and norm3[10**4] > norm3[10**5] > norm3[10**6]
    )
    ok = window and toward1 and odd_down
    return ok, (
        f"k=2 ratios {r2[10**4]:.4f}->{r2[10**5]:.4f}->{r2[10**6]:.4f} toward 1: {toward1}; "
        f"odd k=1,3 normalized magnitudes decreasing: {odd_down}"
    )


def criterion_9(actx: AcceptanceContext):
    """Binomial decomposition of centered moments, both accumulation routes."""
    worst = 0.0
    for spec_str in ("all", "primes"):
        spec = parse_spec_string(spec_str)
        c = actx.constants(spec_str)
        counts = actx.counts(spec_str, 10**5)
        S = counter.centered_log_weighted_sums(spec, 10**5, 4, 4, c, Centering.MU_LOG_n)
        for k in range(1, 5):
            lhs, rhs = analysis.binomial_identity_sides(spec, 10**5, k, c, counts, S)
            rel = abs(lhs - rhs) / max(abs(lhs), 1e-300)
            worst = max(worst, rel)
    ok = worst <= 1e-9
    return ok, f"worst relative gap over families x k<=4 at N=1e5: {worst:.2e} <= 1e-9"


def criterion_10(actx: AcceptanceContext):
    """Gaussian moment targets and the fourth standardized moment's march to 3."""
    gm = (spectral.gaussian_moment(2), spectral.gaussian_moment(4), spectral.gaussian_moment(6))
    c = actx.constants("all")
    k4 = {}
    for N in (10**4, 10**6):
        s = analysis.summarize_distribution(actx.counts("all", N), c, K=4)
        k4[N] = s.paper_standardized_moments[3]
    window = 1.5 <= k4[10**6] <= 4.5
    toward3 = abs(k4[10**6] - 3) < abs(k4[10**4] - 3)
    ok = gm == (1, 3, 15) and window and toward3
    return ok, (
        f"gaussian_moment(2,4,6) = {gm}; standardized k=4 at 1e6 = {k4[10**6]:.3f} "
        f"in [1.5,4.5], toward 3 from 1e4 ({k4[10**4]:.3f}): {toward3}"
    )


def criterion_11(actx: AcceptanceContext):
    """Sampler exactness and seeded goodness of fit."""
    spec = parse_spec_string("all")
    worst_gap = Fraction(0)
    checked = 0
    for N in range(1, 31):
        lat = counter.floor_lattice(spec, N)
        target = Fraction(1, lat.A_N)
        for n in range(1, N + 1):
            for seq in counter.brute_force_enumerate(spec, n):
                p = sampler.decode_probability(spec, N, lat, seq)
                worst_gap = max(worst_gap, abs(p - target))
                checked += 1
    exact_ok = worst_gap <= Fraction(1, 10**12)

    N = 10**4
    smp = sampler.FactorizationSampler(spec, N, seed=GOF_SEED)
    hist = sampler.empirical_distribution(smp.sample_many(10**5))
    rep = sampler.chi_square_gof(hist, actx.counts("all", N).masses())
    ok = exact_ok and rep.p_value > 1e-3
    return ok, (
        f"{checked} decode probabilities, worst |p - 1/A(N)| = {float(worst_gap):.1e}; "
        f"chi-square p = {rep.p_value:.4f} > 1e-3 (seed {GOF_SEED})"
    )


def criterion_12(actx: AcceptanceContext):
    """The unused-budget drift E(log N - log nu_N) stays near 1/rho."""
    c = actx.constants("all")
    spec = parse_spec_string("all")
    drifts = {
        N: analysis.drift_report(spec, N, c, actx.counts("all", N, per_n=True))
        for N in (10**4, 10**5, 10**6)
    }
    limit = 1 / float(c.rho)
    near = abs(drifts[10**6] - limit) <= 0.15 * limit
    bounded = all(v < 2 for v in drifts.values())
    ok = near and bounded
    return ok, (
        f"drift at 1e6 = {drifts[10**6]:.4f} within 15% of 1/rho = {limit:.4f}: {near}; "
        f"all below 2: {bounded}"
    )


def criterion_13(actx: AcceptanceContext):
    """Shifted-root consistency at z = 0."""
    spec = parse_spec_string("all")
    c = actx.constants("all")
    ctx = PrecisionContext(working_digits=40, target_digits=25)
    ratio = analysis.mgf_ratio(spec, 0, 10**4, c, actx.counts("all", 10**4), ctx)
    r0 = spectral.shifted_rho(spec, 0, ctx)
    rho = spectral.solve_rho(spec, ctx)
    same = r0.value == rho.value
    ok = ratio == 1.0 and same
    return ok, f"mgf_ratio(z=0) = {ratio} exactly; shifted_rho(0) == rho: {same}"


_FD_POINTS = {
    "all": ("1.3", "1.5", "1.7286", "2.2", "3.0"),
    "primes": ("1.2", "1.4", "1.7", "2.5", "4.0"),
    "squarefree": ("1.3", "1.58", "1.9", "2.5", "3.5"),
    "totient": ("1.8", "2.0", "2.264", "2.6", "3.2"),
    "powers:3": ("0.4", "0.63", "1.0", "1.8", "3.0"),
    "explicit:2,3": ("-0.5", "0.3", "0.788", "1.5", "3.0"),
}


def criterion_14(actx: AcceptanceContext):
    """Numerical hygiene: derivatives vs finite differences, radius honesty."""
    worst = float("inf")
    for spec_str, points in _FD_POINTS.items():
        spec = parse_spec_string(spec_str)
        kw = {"euler_product_bound": 3000} if spec_str == "totient" else {}
        ctx = PrecisionContext(working_digits=70, target_digits=35, **kw)
        for s in points:
            with mp.workdps(ctx.dps):
                d1, d2 = fd_derivs(spec, mpf(s), ctx)
                _, a1, a2 = eval_P_derivs(spec, mpf(s), ctx)
                worst = min(worst, _sig_digits(a1.value, d1), _sig_digits(a2.value, d2))
    fd_ok = worst >= 25

    stable = True
    for spec_str in ("all", "primes", "squarefree", "explicit:2,3", "totient"):
        kw = {"euler_product_bound": 10**5} if spec_str == "totient" else {}
        lo = actx.constants(spec_str, working=40, target=30, **kw)
        hi = actx.constants(spec_str, working=60, target=50, **kw)
        for field in ("rho", "mu", "sigma2"):
            if abs(getattr(lo, field) - getattr(hi, field)) > lo.radii[field]:
                stable = False
    ok = fd_ok and stable
    return ok, (
        f"worst FD agreement {worst:.0f} digits >= 25 over 6 families x 5 points; "
        f"+20-digit rerun within prior radii: {stable}"
    )


CRITERIA = [
    (1, "constants-primes", True, criterion_1),
    (2, "kalmar-root", True, criterion_2),
    (3, "totient-root", True, criterion_3),
    (4, "counting-oracle", True, criterion_4),
    (5, "degenerate-uniform-law", True, criterion_5),
    (6, "tauberian-ratio-trend", False, criterion_6),
    (7, "mean-variance-trend", False, criterion_7),
    (8, "even-moment-prediction", False, criterion_8),
    (9, "binomial-identity", False, criterion_9),
    (10, "gaussian-targets", True, criterion_10),
    (11, "sampler-exactness", True, criterion_11),
    (12, "drift", False, criterion_12),
    (13, "mgf-consistency", True, criterion_13),
    (14, "numerical-hygiene", True, criterion_14),
]


def run_criterion(cid: int, actx: AcceptanceContext | None = None) -> CriterionResult:
    actx = actx if actx is not None else AcceptanceContext()
    entry = next(e for e in CRITERIA if e[0] == cid)
    _, name, quick, fn = entry
    t0 = time.time()
    try:
        passed, details = fn(actx)
    except Exception as exc:  # a crash is a failure with the reason recorded
        passed, details = False, f"raised {type(exc).__name__}: {exc}"
    return CriterionResult(cid, name, quick, passed, details, time.time() - t0)


def run_suite(
    suite: str = "full", only: list[int] | None = None, actx: AcceptanceContext | None = None
) -> list[CriterionResult]:
    actx = actx if actx is not None else AcceptanceContext()
    results = []
    for cid, name, quick, _fn in CRITERIA:
        if only is not None and cid not in only:
            continue
        if suite == "quick" and not quick:
            continue
        results.append(run_criterion(cid, actx))
    return results


def thread_cap() -> int:
    """Worker cap from FACTORIA_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("FACTORIA_THREADS", "1")))
    except ValueError:
        return 1


def prewarm(results_needed: list[tuple[str, int, bool]], actx: AcceptanceContext) -> None:
    """Optionally compute independent count jobs on a small thread pool."""
    cap = thread_cap()
    if cap <= 1:
        return
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=cap) as pool:
        list(pool.map(lambda job: actx.counts(job[0], job[1], job[2]), results_needed))
