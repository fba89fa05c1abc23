import math
import struct

import numpy as np
import pytest
from mpmath import mp, mpf

from factoria.counter import (
    Centering,
    WidthPolicy,
    brute_force_count,
    brute_force_enumerate,
    centered_log_weighted_sums,
    centered_sums,
    certify_int64,
    count_a,
    count_layers,
    floor_lattice,
    load_counts_cache,
    save_counts_cache,
)
from factoria.dirichlet import eval_P
from factoria.errors import CountOverflowError
from factoria.factorset import FactorSetSpec

ALL = FactorSetSpec.all_integers()
PRIMES = FactorSetSpec.primes()
SQF = FactorSetSpec.squarefree()
TOT = FactorSetSpec.totient()
E23 = FactorSetSpec.explicit([2, 3])
FAMILIES = [ALL, PRIMES, SQF, TOT, E23]


def test_count_a_worked_examples():
    a, A = count_a(ALL, 12)
    assert a[1:] == [1, 1, 1, 2, 1, 3, 1, 4, 2, 3, 1, 8]
    assert A == 28
    a, A = count_a(FactorSetSpec.explicit([2]), 100)
    assert A == 7
    assert [n for n in range(1, 101) if a[n]] == [1, 2, 4, 8, 16, 32, 64]
    a, _ = count_a(E23, 12)
    assert a[12] == 3  # the orderings of 2*2*3


def test_count_layers_worked_examples():
    lc = count_layers(ALL, 4)
    assert lc.T == (1, 3, 1) and lc.A_N == 5
    lc = count_layers(FactorSetSpec.explicit([2]), 2**6)
    assert lc.T == (1,) * 7
    # T_3(30) from the exhaustive oracle, includes the 6 orderings of 2*3*5
    by_len = {}
    for n in range(1, 31):
        for seq in brute_force_enumerate(PRIMES, n):
            by_len[len(seq)] = by_len.get(len(seq), 0) + 1
    lc = count_layers(PRIMES, 30)
    assert lc.T[3] == by_len[3]
    assert sum(1 for s in brute_force_enumerate(PRIMES, 30) if len(s) == 3) == 6


@pytest.mark.parametrize("spec", FAMILIES, ids=str)
def test_layer_consistency(spec):
    lc = count_layers(spec, 500)
    assert sum(lc.T) == lc.A_N
    assert lc.T[0] == 1
    assert lc.m_max <= int(math.log2(500))
    assert all(t >= 0 for t in lc.T)


@pytest.mark.parametrize("spec", FAMILIES, ids=str)
def test_per_n_totals_match_count_a(spec):
    lc = count_layers(spec, 800, keep_per_n=True)
    a, A = count_a(spec, 800)
    assert lc.A_N == A
    assert [int(x) for x in lc.per_n[1:]] == a[1:]


@pytest.mark.parametrize("spec", FAMILIES, ids=str)
def test_oracle_equality_small(spec):
    a, _ = count_a(spec, 300)
    for n in range(1, 301):
        assert brute_force_count(spec, n) == a[n], n


@pytest.mark.parametrize("spec", FAMILIES, ids=str)
def test_floor_lattice_matches_sieve(spec):
    for N in (1, 7, 100, 1000):
        assert floor_lattice(spec, N).A_N == count_a(spec, N)[1]


def test_floor_lattice_worked_examples():
    assert floor_lattice(ALL, 12).A_N == 28
    assert floor_lattice(ALL, 1).A_N == 1
    assert floor_lattice(E23, 1).A_N == 1
    # reconciled by the exhaustive oracle: A(12) = 1 + A(6) + A(4) = 11
    lat = floor_lattice(E23, 12)
    assert lat.A_N == 1 + lat.A(6) + lat.A(4) == 11


def test_floor_lattice_monotone_on_states():
    lat = floor_lattice(ALL, 10**4)
    vs = sorted(lat.values)
    assert all(lat.values[a] <= lat.values[b] for a, b in zip(vs, vs[1:]))


def test_dirichlet_series_partial_sums_monotone_below_limit(constants_all, ctx40):
    # at s = rho + 1 the partial sums increase toward 1/(1 - P(s))
    s = float(constants_all.rho) + 1
    with mp.workdps(40):
        limit = 1 / (1 - eval_P(ALL, s, ctx40).value)
        a, _ = count_a(ALL, 4000)
        partial = mpf(0)
        last = mpf(0)
        for N in (10, 100, 1000, 4000):
            partial = sum(mpf(a[n]) * mpf(n) ** -s for n in range(1, N + 1))
            assert partial > last
            assert partial <= limit
            last = partial


def test_weighted_counting_matches_enumeration():
    spec = FactorSetSpec.weighted({2: 2, 3: 1, 6: 3})
    a, _ = count_a(spec, 60)
    for n in range(1, 61):
        assert len(brute_force_enumerate(spec, n)) == a[n]


def test_brute_force_examples():
    assert sorted(brute_force_enumerate(ALL, 8)) == [(2, 2, 2), (2, 4), (4, 2), (8,)]
    assert brute_force_enumerate(ALL, 1) == [()]
    assert brute_force_enumerate(PRIMES, 12) == [(2, 2, 3), (2, 3, 2), (3, 2, 2)]


def test_centered_sums_k0_equals_A(constants_all):
    for center in Centering:
        s = centered_sums(ALL, 2000, 3, center, constants_all)
        assert s.sums[0] == count_a(ALL, 2000)[1]


def test_centered_sums_k1_linearity(constants_all):
    # k=1 with the fixed center: sum_m T_m m - mu log N * A(N)
    N = 2000
    s = centered_sums(ALL, N, 1, Centering.MU_LOG_N, constants_all)
    lc = count_layers(ALL, N)
    mu = float(constants_all.mu)
    expect = sum(m * t for m, t in enumerate(lc.T)) - mu * math.log(N) * lc.A_N
    assert abs(s.sums[1] - expect) < 1e-6 * abs(expect)


def test_binomial_identity_small(constants_all):
    from factoria.analysis import binomial_identity_sides

    for k in range(1, 5):
        lhs, rhs = binomial_identity_sides(ALL, 10**4, k, constants_all)
        assert abs(lhs - rhs) <= 1e-9 * abs(lhs)


def test_width_policy_forced_int64_raises():
    heavy = FactorSetSpec.weighted({2: 10**6})
    assert not certify_int64(heavy, 2**11)
    with pytest.raises(CountOverflowError):
        count_layers(heavy, 2**11, width=WidthPolicy.INT64)


def test_bigint_fallback_exact():
    heavy = FactorSetSpec.weighted({2: 10**6})
    lc = count_layers(heavy, 2**11, keep_per_n=True)  # auto -> object dtype
    assert lc.T[11] == 10**66
    assert int(lc.per_n[2**11]) == 10**66
    a, _ = count_a(heavy, 2**11)
    assert a[2**11] == 10**66


def test_counts_cache_round_trip(tmp_path):
    a, _ = count_a(ALL, 500)
    path = tmp_path / "counts.bin"
    save_counts_cache(path, a)
    assert load_counts_cache(path)[1:] == a[1:]
    # documented format: record n at offset (n-1)*16, 16-byte little-endian
    blob = path.read_bytes()
    assert len(blob) == 500 * 16
    n = 12
    lo, hi = struct.unpack_from("<QQ", blob, (n - 1) * 16)
    assert lo + (hi << 64) == a[n] == 8


def test_counts_cache_rejects_overwide(tmp_path):
    with pytest.raises(CountOverflowError):
        save_counts_cache(tmp_path / "x.bin", [0, 1, 1 << 128])
