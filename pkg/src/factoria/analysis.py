"""Finite-N laws confronted with their asymptotic predictions.

Everything exact lives upstream (counter); everything asymptotic lives in
spectral.  This module pairs them: distribution summaries with normal-law
distances, centered-sum reports against the Tauberian predictions, the
growth-constant ratio A(N)/(R N^rho), moment-generating-function ratios,
the budget drift E(log N - log nu_N), and the exact uniform law of the
single-member degenerate case.

Asymptotic statements are trend material: at desk scale the limits converge
like powers of 1/log N, so callers assert monotone improvement across
decades plus loose windows, never tight equality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from mpmath import mp, mpf

from .counter import (
    Centering,
    CenteredSums,
    LayeredCounts,
    centered_log_weighted_sums,
    centered_sums,
    count_layers,
    floor_lattice,
)
from .dirichlet import DEFAULT_CONTEXT, PrecisionContext
from .factorset import FactorSetSpec
from .spectral import (
    DelangeQuery,
    SpectralConstants,
    delange_prediction,
    mgf_prediction,
    pole_coefficient_ck,
)

_DIST_DPS = 40  # distribution-side arithmetic precision (<= ~20 atoms)


@dataclass(frozen=True, eq=False)
class DistributionSummary:
    """The exact law of the factor count Y_N and its normal-law distances."""

    spec: FactorSetSpec
    N: int
    A_N: int
    masses: tuple[Fraction, ...]
    mean: float
    variance: float
    standardized_central_moments: tuple[float, ...]  # about the mean, k = 1..K
    paper_standardized_moments: tuple[float, ...]    # ((Y - mu log N)/(sigma sqrt(log N)))^k
    sup_cdf_distance: float
    tv_distance: float


@dataclass(frozen=True, eq=False)
class MomentReport:
    """One centered power sum against its closed-form prediction."""

    spec: FactorSetSpec
    N: int
    k: int
    centering: Centering
    exact_sum: float
    prediction: float          # 0.0 for odd k
    ratio: float | None        # exact/prediction, even k only
    normalized_magnitude: float | None  # |exact| / (A(N) (log N)^(k/2)), odd k


def summarize_distribution(
    counts: LayeredCounts, constants: SpectralConstants | None, K: int = 8
) -> DistributionSummary:
    """Exact masses, moments, and distances to the standard normal.

    Without constants (degenerate sets that have no growth root) the
    standardization falls back to the distribution's own mean and standard
    deviation and the paper-standardized moment list matches the
    mean-centered one.
    """
    with mp.workdps(_DIST_DPS):
        A = counts.A_N
        T = counts.T
        masses = tuple(Fraction(t, A) for t in T)
        ms = [mpf(t) / A for t in T]
        mean = sum(m * p for m, p in enumerate(ms))
        var = sum((m - mean) ** 2 * p for m, p in enumerate(ms))

        std_cm = []
        sd = mp.sqrt(var) if var > 0 else mpf(0)
        for k in range(1, K + 1):
            ck = sum((m - mean) ** k * p for m, p in enumerate(ms))
            std_cm.append(float(ck / sd**k) if sd > 0 else 0.0)

        logN = mp.log(counts.N) if counts.N > 1 else mpf(1)
        if constants is not None:
            mu = constants.mu
            sig = mp.sqrt(constants.sigma2)
            scale = sig * mp.sqrt(logN)
            center = mu * logN
        else:
            scale = sd if sd > 0 else mpf(1)
            center = mean
        paper_std = []
        for k in range(1, K + 1):
            paper_std.append(float(sum(((m - center) / scale) ** k * p for m, p in enumerate(ms))))

        # Kolmogorov distance at the atoms, both one-sided limits
        sup_d = mpf(0)
        F = mpf(0)
        for m, p in enumerate(ms):
            x = (m - center) / scale
            phi = mp.ncdf(x)
            sup_d = max(sup_d, abs(F - phi))
            F += p
            sup_d = max(sup_d, abs(F - phi))

        # total variation against the normal discretized to integer cells
        tv = mpf(0)
        q_covered = mpf(0)
        for m, p in enumerate(ms):
            lo = (m - mpf(1) / 2 - center) / scale
            hi = (m + mpf(1) / 2 - center) / scale
            q = mp.ncdf(hi) - mp.ncdf(lo)
            q_covered += q
            tv += abs(p - q)
        tv = (tv + (1 - q_covered)) / 2

        return DistributionSummary(
            spec=counts.spec,
            N=counts.N,
            A_N=A,
            masses=masses,
            mean=float(mean),
            variance=float(var),
            standardized_central_moments=tuple(std_cm),
            paper_standardized_moments=tuple(paper_std),
            sup_cdf_distance=float(sup_d),
            tv_distance=float(tv),
        )


def moment_report(
    spec: FactorSetSpec,
    N: int,
    k: int,
    centering: Centering,
    constants: SpectralConstants,
    sums: CenteredSums | None = None,
) -> MomentReport:
    """Pair the exact centered sum of order k with the Tauberian prediction."""
    if sums is None:
        sums = centered_sums(spec, N, k, centering, constants)
    if sums.K < k or sums.center is not centering or sums.N != N:
        raise ValueError("precomputed sums do not cover the requested report")
    exact = sums.sums[k]
    A_N = sums.sums[0]
    if k % 2 == 0:
        ck = pole_coefficient_ck(constants, k)
        pred = delange_prediction(
            DelangeQuery(float(constants.rho), k / 2 + 1, float(ck), N)
        )
        return MomentReport(
            spec=spec, N=N, k=k, centering=centering,
            exact_sum=exact, prediction=float(pred),
            ratio=exact / float(pred), normalized_magnitude=None,
        )
    norm = abs(exact) / (A_N * math.log(N) ** (k / 2))
    return MomentReport(
        spec=spec, N=N, k=k, centering=centering,
        exact_sum=exact, prediction=0.0, ratio=None, normalized_magnitude=norm,
    )


def tauberian_ratio(
    spec: FactorSetSpec,
    N: int,
    constants: SpectralConstants,
    A_N: int | None = None,
) -> float:
    """A(N) / (R N^rho): tends to 1 when the growth prediction is right."""
    if A_N is None:
        A_N = floor_lattice(spec, N).A_N
    pred = delange_prediction(DelangeQuery(float(constants.rho), 1.0, float(constants.mu), N))
    return float(mpf(A_N) / pred)


def binomial_identity_sides(
    spec: FactorSetSpec,
    N: int,
    k: int,
    constants: SpectralConstants,
    counts: LayeredCounts | None = None,
    S: np.ndarray | None = None,
) -> tuple[float, float]:
    """Both sides of the centered-sum decomposition.

    Left: A(N) E(Y_N - mu log N)^k straight from the distribution.
    Right: sum over l <= k of C(k,l) (-mu)^(k-l) sum_n b_l(n) (log N/n)^(k-l)
    from an independent per-n pass.  They agree algebraically; the float
    comparison validates both accumulation paths.
    """
    if counts is None:
        counts = count_layers(spec, N)
    mu = float(constants.mu)
    logN = math.log(N)
    lhs = math.fsum(t * (m - mu * logN) ** k for m, t in enumerate(counts.T))
    if S is None:
        S = centered_log_weighted_sums(spec, N, k, k, constants, Centering.MU_LOG_n)
    rhs = math.fsum(
        math.comb(k, l) * (-mu) ** (k - l) * S[l, k - l] for l in range(k + 1)
    )
    return lhs, rhs


def mgf_ratio(
    spec: FactorSetSpec,
    z,
    N: int,
    constants: SpectralConstants,
    counts: LayeredCounts | None = None,
    ctx: PrecisionContext = DEFAULT_CONTEXT,
) -> float:
    """Exact E(exp(z Y_N)) divided by the shifted-root prediction.

    Diagnostic only: the prediction is pointwise in z, so no tightness is
    asserted anywhere; at z = 0 both sides are exactly 1.
    """
    if counts is None:
        counts = count_layers(spec, N)
    with mp.workdps(_DIST_DPS):
        z = mpf(z)
        exact = sum(mpf(t) * mp.exp(m * z) for m, t in enumerate(counts.T)) / counts.A_N
        pred = mgf_prediction(spec, z, N, ctx)
        return float(exact / pred)


def drift_report(
    spec: FactorSetSpec,
    N: int,
    constants: SpectralConstants,
    counts: LayeredCounts | None = None,
) -> float:
    """E(log N - log nu_N): the expected log-budget left unused.

    Bounded in N with limit 1/rho (partial summation against A(x) ~ R x^rho).
    """
    if counts is None or counts.per_n is None:
        counts = count_layers(spec, N, keep_per_n=True)
    a = np.asarray(counts.per_n, dtype=np.float64)
    logs = np.zeros(N + 1)
    np.log(np.arange(1, N + 1, dtype=np.float64), out=logs[1:])
    total = float(np.dot(a[1:], math.log(N) - logs[1:]))
    return total / counts.A_N


def uniform_case_check(d: int, N: int) -> bool:
    """Exact check of the degenerate single-member law.

    For the one-element set {d} the factor count is uniform on
    {0, ..., floor(log_d N)}: every layer total must equal 1 exactly.
    """
    if d < 2 or N < 1:
        raise ValueError("need d >= 2 and N >= 1")
    counts = count_layers(FactorSetSpec.explicit([d]), N)
    j = 0
    power = 1
    while power * d <= N:
        power *= d
        j += 1
    return counts.T == (1,) * (j + 1)
