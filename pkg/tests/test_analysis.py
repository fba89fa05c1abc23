import math
from fractions import Fraction

import pytest

from factoria.analysis import (
    drift_report,
    mgf_ratio,
    moment_report,
    summarize_distribution,
    tauberian_ratio,
    uniform_case_check,
)
from factoria.counter import Centering, centered_sums, count_layers, floor_lattice
from factoria.factorset import FactorSetSpec
from factoria.spectral import absolute_moment_prediction

ALL = FactorSetSpec.all_integers()


def test_uniform_summary_explicit2():
    # uniform on {0..6}: mean 3, variance (7^2 - 1)/12 = 4
    counts = count_layers(FactorSetSpec.explicit([2]), 100)
    s = summarize_distribution(counts, None, K=4)
    assert abs(s.mean - 3) < 1e-12
    assert abs(s.variance - 4) < 1e-12
    assert s.masses == tuple(Fraction(1, 7) for _ in range(7))


def test_summary_all_N4(constants_all):
    s = summarize_distribution(count_layers(ALL, 4), constants_all, K=4)
    assert s.mean == 1.0
    assert s.masses == (Fraction(1, 5), Fraction(3, 5), Fraction(1, 5))


@pytest.mark.parametrize(
    "spec",
    [ALL, FactorSetSpec.primes(), FactorSetSpec.totient(), FactorSetSpec.explicit([2, 3])],
    ids=str,
)
def test_masses_sum_to_one_exactly(spec, constants_all):
    for N in (10, 200, 3000):
        counts = count_layers(spec, N)
        s = summarize_distribution(counts, None, K=2)
        assert sum(s.masses) == 1


def test_mean_ratio_loose_window_at_1e5(constants_all):
    s = summarize_distribution(count_layers(ALL, 10**5), constants_all, K=2)
    ratio = s.mean / (float(constants_all.mu) * math.log(10**5))
    assert abs(ratio - 1) < 0.25


def test_moment_report_k0_equals_tauberian(constants_all):
    N = 10**4
    sums = centered_sums(ALL, N, 2, Centering.MU_LOG_n, constants_all)
    r = moment_report(ALL, N, 0, Centering.MU_LOG_n, constants_all, sums)
    t = tauberian_ratio(ALL, N, constants_all, A_N=int(sums.sums[0]))
    assert r.ratio == t
    assert r.exact_sum == sums.sums[0]


def test_moment_report_against_precomputed_guard(constants_all):
    sums = centered_sums(ALL, 100, 2, Centering.MU_LOG_n, constants_all)
    with pytest.raises(ValueError):
        moment_report(ALL, 100, 4, Centering.MU_LOG_n, constants_all, sums)
    with pytest.raises(ValueError):
        moment_report(ALL, 200, 2, Centering.MU_LOG_n, constants_all, sums)


def test_uniform_case_check_examples():
    assert uniform_case_check(2, 100)
    assert uniform_case_check(3, 80)  # support {0..3} since 3^4 = 81 > 80
    assert uniform_case_check(2, 1)
    for d in (2, 3, 5):
        for N in (10, 100, 1000):
            assert uniform_case_check(d, N)
    with pytest.raises(ValueError):
        uniform_case_check(1, 10)


def test_drift_exact_structure_powers_of_two(constants_all):
    # uniform on products 2^i, i = 0..j: E(log(2^j) - log(2^i)) = (j/2) log 2
    spec = FactorSetSpec.explicit([2])
    for j in (3, 6):
        N = 2**j
        got = drift_report(spec, N, constants_all)
        assert abs(got - j / 2 * math.log(2)) < 1e-12


def test_drift_bounded_small_N(constants_all):
    for N in (10**3, 10**4):
        assert drift_report(ALL, N, constants_all) < 2


def test_mgf_ratio_exact_at_zero(constants_all, ctx40):
    counts = count_layers(ALL, 1000)
    assert mgf_ratio(ALL, 0, 1000, constants_all, counts, ctx40) == 1.0


def test_mgf_ratio_order_one_at_positive_z(constants_all, ctx40):
    counts = count_layers(ALL, 10**4)
    r = mgf_ratio(ALL, 0.2, 10**4, constants_all, counts, ctx40)
    assert 0.5 < r < 2.0


def test_sup_cdf_distance_decreases(constants_all):
    d = [
        summarize_distribution(count_layers(ALL, N), constants_all, K=2).sup_cdf_distance
        for N in (10**3, 10**4, 10**5)
    ]
    assert d[0] > d[1] > d[2]


def test_odd_standardized_moments_decrease(constants_all, constants_primes):
    for spec, c in ((ALL, constants_all), (FactorSetSpec.primes(), constants_primes)):
        m1 = []
        m3 = []
        for N in (10**3, 10**4, 10**5):
            s = summarize_distribution(count_layers(spec, N), c, K=3)
            m1.append(abs(s.paper_standardized_moments[0]))
            m3.append(abs(s.paper_standardized_moments[2]))
        assert m1[0] > m1[1] > m1[2]
        assert m3[0] > m3[1] > m3[2]


def test_absolute_moment_prediction_vs_exact_distribution(constants_all):
    # loose finite-N window: first absolute central moment vs its prediction
    N = 10**5
    counts = count_layers(ALL, N)
    mu = float(constants_all.mu)
    center = mu * math.log(N)
    exact = sum(abs(m - center) * t for m, t in enumerate(counts.T)) / counts.A_N
    pred = float(absolute_moment_prediction(constants_all, 1, N))
    assert abs(exact / pred - 1) < 0.25


def test_tv_distance_reasonable(constants_all):
    s = summarize_distribution(count_layers(ALL, 10**4), constants_all, K=2)
    assert 0 < s.tv_distance < 0.5
