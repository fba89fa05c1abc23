import random
from fractions import Fraction

import pytest

from factoria.counter import brute_force_enumerate, count_layers, floor_lattice
from factoria.factorset import FactorSetSpec
from factoria.sampler import (
    FactorizationSampler,
    chi_square_gof,
    decode_probability,
    empirical_distribution,
    sample_factorization,
)

ALL = FactorSetSpec.all_integers()


@pytest.mark.parametrize("N", [1, 4, 12, 20])
def test_decoding_probabilities_exactly_uniform(N):
    lat = floor_lattice(ALL, N)
    total = Fraction(0)
    for n in range(1, N + 1):
        for seq in brute_force_enumerate(ALL, n):
            p = decode_probability(ALL, N, lat, seq)
            assert p == Fraction(1, lat.A_N)
            total += p
    assert total == 1


def test_weighted_decoding_probabilities():
    spec = FactorSetSpec.weighted({2: 2, 3: 1})
    N = 18
    lat = floor_lattice(spec, N)
    total = Fraction(0)
    for n in range(1, N + 1):
        seqs = set(brute_force_enumerate(spec, n))
        for seq in seqs:
            wprod = 1
            for q in seq:
                wprod *= 2 if q == 2 else 1
            p = decode_probability(spec, N, lat, seq)
            assert p == Fraction(wprod, lat.A_N)
            total += p
    assert total == 1


def test_seed_determinism():
    a = FactorizationSampler(ALL, 1000, seed=123).sample_many(200)
    b = FactorizationSampler(ALL, 1000, seed=123).sample_many(200)
    assert a == b
    c = FactorizationSampler(ALL, 1000, seed=124).sample_many(200)
    assert a != c


def test_product_bound_and_record_consistency():
    smp = FactorizationSampler(ALL, 500, seed=9)
    for r in smp.sample_many(2000):
        assert 1 <= r.product <= 500
        assert r.m == len(r.factors)
        prod = 1
        for q in r.factors:
            assert q >= 2
            prod *= q
        assert prod == r.product


def test_sample_at_N1_always_empty():
    smp = FactorizationSampler(ALL, 1, seed=0)
    for r in smp.sample_many(10):
        assert r.factors == () and r.product == 1 and r.m == 0


def test_sample_factorization_function_reuses_lattice():
    lat = floor_lattice(ALL, 100)
    rng = random.Random(5)
    recs = [sample_factorization(ALL, 100, lat, rng) for _ in range(100)]
    assert all(r.product <= 100 for r in recs)
    rng2 = random.Random(5)
    recs2 = [sample_factorization(ALL, 100, lat, rng2) for _ in range(100)]
    assert recs == recs2


def test_empirical_matches_exact_law_powers_of_two():
    spec = FactorSetSpec.explicit([2])
    smp = FactorizationSampler(spec, 100, seed=31415)
    hist = empirical_distribution(smp.sample_many(10**4))
    rep = chi_square_gof(hist, count_layers(spec, 100).masses())
    assert rep.p_value > 1e-3
    assert rep.bins == 7  # uniform over m = 0..6


def test_weighted_sampling_gof():
    spec = FactorSetSpec.weighted({2: 2, 3: 1})
    smp = FactorizationSampler(spec, 200, seed=77)
    hist = empirical_distribution(smp.sample_many(20000))
    rep = chi_square_gof(hist, count_layers(spec, 200).masses())
    assert rep.p_value > 1e-3


def test_chi_square_exact_histogram_is_zero():
    masses = count_layers(FactorSetSpec.explicit([2]), 100).masses()  # 7 x 1/7
    hist = {m: 100 for m in range(7)}
    rep = chi_square_gof(hist, masses)
    assert rep.statistic == 0.0
    assert rep.p_value == 1.0


def test_chi_square_degenerate_raises():
    masses = count_layers(ALL, 2).masses()
    with pytest.raises(ValueError):
        chi_square_gof({0: 3, 1: 4}, masses)


def test_chi_square_rejects_wrong_law():
    # samples from N=100 scored against the N=20 law must fail hard
    smp = FactorizationSampler(ALL, 100, seed=1)
    hist = empirical_distribution(smp.sample_many(5000))
    rep = chi_square_gof(hist, count_layers(ALL, 100).masses())
    bad = chi_square_gof(hist, count_layers(ALL, 20).masses())
    assert rep.p_value > 1e-3
    assert bad.p_value < 1e-6
