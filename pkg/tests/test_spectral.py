import math

import mpmath
import pytest
from mpmath import mp, mpf

from factoria.dirichlet import PrecisionContext
from factoria.errors import NoRootError
from factoria.factorset import FactorSetSpec
from factoria.spectral import (
    DelangeQuery,
    absolute_moment_prediction,
    delange_prediction,
    gaussian_moment,
    mgf_prediction,
    pole_coefficient_ck,
    shifted_rho,
    solve_rho,
    spectral_constants,
)

CTX = PrecisionContext(working_digits=40, target_digits=25)


def bisect_oracle(f, lo, hi, iters=200):
    """Plain bisection, independent of the production solver."""
    with mp.workdps(70):
        lo, hi = mpf(lo), mpf(hi)
        for _ in range(iters):
            mid = (lo + hi) / 2
            if f(mid) > 0:
                lo = mid
            else:
                hi = mid
        return (lo + hi) / 2


def test_rho_primes_paper_digits(constants_primes):
    with mp.workdps(60):
        ref = mpf("1.3994333287263303182028072")
        assert abs(constants_primes.rho - ref) < mpf(10) ** -24


def test_rho_all_integers_kalmar(constants_all):
    assert int(constants_all.rho * 10**4) == 17286
    with mp.workdps(60):
        # consistency: zeta(rho) = 2
        assert abs(mpmath.zeta(constants_all.rho) - 2) < mpf(10) ** -22


def test_rho_explicit23_vs_bisection_oracle():
    r = solve_rho(FactorSetSpec.explicit([2, 3]), CTX)
    with mp.workdps(70):
        ref = bisect_oracle(lambda s: mpf(2) ** -s + mpf(3) ** -s - 1, "0.5", "1.0")
        assert abs(r.value - ref) < mpf(10) ** -30


def test_rho_totient_paper_value():
    ctx = PrecisionContext(working_digits=30, target_digits=12, euler_product_bound=10**5)
    r = solve_rho(FactorSetSpec.totient(), ctx)
    assert abs(float(r.value) - 2.26386) < 1e-4


def test_no_root_singletons():
    with pytest.raises(NoRootError):
        solve_rho(FactorSetSpec.explicit([2]), CTX)
    with pytest.raises(NoRootError) as exc:
        solve_rho(FactorSetSpec.explicit([5]), CTX)
    assert exc.value.supremum is not None
    assert float(exc.value.supremum) <= 1.0


def test_constants_paper_values(constants_primes):
    with mp.workdps(60):
        assert abs(constants_primes.mu - mpf("0.5776486251951380544061351")) < mpf(10) ** -24
        assert abs(constants_primes.sigma2 - mpf("0.4843965045135982812807456")) < mpf(10) ** -24


def test_constants_identities(constants_all, constants_primes):
    for c in (constants_all, constants_primes):
        assert c.mu > 0 and c.sigma2 > 0
        with mp.workdps(60):
            assert abs(c.B2_at_rho - c.sigma2 / c.mu) < mpf(10) ** -40
            assert abs(c.B1prime_at_rho - c.sigma2 / c.mu**2) < mpf(10) ** -40
            assert abs(c.R - c.mu / c.rho) < mpf(10) ** -40
            # B1(rho) = P(rho) + mu P'(rho) vanishes at the root
            assert abs(1 + c.mu * c.P1) < mpf(10) ** -24
            assert c.rho > max(c.kappa, 0)


def test_constants_explicit23_closed_form():
    c = spectral_constants(FactorSetSpec.explicit([2, 3]), CTX)
    with mp.workdps(60):
        mu_direct = 1 / (
            mpf(2) ** -c.rho * mp.log(2) + mpf(3) ** -c.rho * mp.log(3)
        )
        assert abs(c.mu - mu_direct) < mpf(10) ** -24


def test_pole_coefficients(constants_primes):
    c = constants_primes
    assert pole_coefficient_ck(c, 0) == c.mu
    with mp.workdps(50):
        assert abs(pole_coefficient_ck(c, 2) - c.mu * c.sigma2) < mpf(10) ** -30
        expect4 = 24 * c.mu * (c.sigma2 / 2) ** 2
        assert abs(pole_coefficient_ck(c, 4) - expect4) < mpf(10) ** -30
    with pytest.raises(ValueError):
        pole_coefficient_ck(c, 3)


def test_delange_prediction_forms(constants_all):
    c = constants_all
    N = 10**4
    with mp.workdps(50):
        # beta = 1, G = mu reproduces the growth prediction R N^rho
        p = delange_prediction(DelangeQuery(float(c.rho), 1.0, float(c.mu), N))
        ref = float(c.mu) / float(c.rho) * N ** float(c.rho)
        assert abs(float(p) / ref - 1) < 1e-12
        # all factors cancel at varrho = beta = G = 1: prediction is N itself
        assert abs(float(delange_prediction(DelangeQuery(1, 1, 1, 7))) - 7) < 1e-12


def test_delange_query_validation():
    with pytest.raises(ValueError):
        DelangeQuery(0.0, 1.0, 1.0, 10)
    with pytest.raises(ValueError):
        DelangeQuery(1.0, 1.0, 1.0, 1)


def test_gaussian_moments():
    assert [gaussian_moment(k) for k in (0, 1, 2, 3, 4, 6, 7, 8)] == [1, 0, 1, 0, 3, 15, 0, 105]
    for k in range(2, 21, 2):
        assert gaussian_moment(k) == (k - 1) * gaussian_moment(k - 2)


def test_absolute_moment_predictions(constants_all):
    c = constants_all
    N = 10**5
    with mp.workdps(50):
        assert abs(absolute_moment_prediction(c, 0, N) - 1) < mpf(10) ** -30
        beta2 = absolute_moment_prediction(c, 2, N)
        assert abs(beta2 - c.sigma2 * mp.log(N)) < mpf(10) ** -25
        beta1 = absolute_moment_prediction(c, 1, N)
        ref = mp.sqrt(c.sigma2) * mp.sqrt(2 * mp.log(N) / mp.pi)
        assert abs(beta1 - ref) < mpf(10) ** -25


def test_shifted_rho_zero_and_monotone(constants_all):
    # P is strictly decreasing, so the root of P(s) = exp(-z) strictly
    # increases with z (larger z means a smaller target value)
    spec = FactorSetSpec.all_integers()
    r0 = shifted_rho(spec, 0, CTX)
    assert r0.value == solve_rho(spec, CTX).value
    values = [shifted_rho(spec, z, CTX).value for z in (-0.4, -0.1, 0.0, 0.2, 0.8)]
    assert all(a < b for a, b in zip(values, values[1:]))


def test_shifted_rho_all_integers_vs_zeta3_oracle():
    # z = log(1/2) turns P = 1/2... no: P(rho(z)) = e^{-z} = 2, i.e. zeta = 3
    with mp.workdps(70):
        r = shifted_rho(FactorSetSpec.all_integers(), mp.log(mpf(1) / 2), CTX)
        ref = bisect_oracle(lambda s: mpmath.zeta(s) - 3, "1.2", "1.8")
        assert abs(r.value - ref) < mpf(10) ** -25


def test_mgf_prediction_at_zero():
    with mp.workdps(60):
        p = mgf_prediction(FactorSetSpec.all_integers(), 0, 10**5, CTX)
        assert p == 1


def test_precision_stability_30_60_90():
    spec = FactorSetSpec.primes()
    runs = {}
    for wd in (30, 60, 90):
        runs[wd] = spectral_constants(spec, PrecisionContext(working_digits=wd))
    with mp.workdps(100):
        for a, b in ((30, 60), (60, 90), (30, 90)):
            for f in ("rho", "mu", "sigma2"):
                gap = abs(getattr(runs[a], f) - getattr(runs[b], f))
                allowed = max(runs[a].radii[f], runs[b].radii[f])
                assert gap <= allowed, (a, b, f, gap, allowed)
