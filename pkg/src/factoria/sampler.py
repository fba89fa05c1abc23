"""Exact uniform sampling of ordered factorizations of integers <= N.

Sequential decoding over the floor lattice: with remaining budget v the
chain stops with probability 1/A(v) (emitting nothing further) and
otherwise emits member q with probability w(q) A(v//q) / (A(v) - 1),
recursing on v//q.  Because A(v) = 1 + sum_q w(q) A(v//q) holds exactly,
the resulting law is exactly uniform over all A(N) weighted factorizations.

Selection inside a step is a two-level exact-integer binary search: first
over blocks of members sharing the same quotient u = v//q (their masses
are (W(q2) - W(q1-1)) * A(u) with W the cumulative weight table), then over
the weight table inside the block.  No floating point touches the law.

The random source is Python's random.Random (MT19937) with explicit
seeding; the algorithm name is recorded in sampler metadata so runs are
reproducible.
"""

from __future__ import annotations

import bisect
import random
import weakref
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.stats import chi2

from .counter import FloorLattice, floor_lattice
from .factorset import FactorSetSpec, weight_prefix_array

RNG_ALGORITHM = "mt19937"


@dataclass(frozen=True)
class SampleRecord:
    """One decoded factorization: the factors, their product, the length."""

    factors: tuple[int, ...]
    product: int
    m: int

    def __post_init__(self):
        assert self.m == len(self.factors)
        p = 1
        for q in self.factors:
            p *= q
        assert p == self.product


class _StateTable:
    """Block decomposition of one lattice state v.

    cum[i] is the cumulative continuation mass of blocks 0..i; each block
    stores (u, A_u, W_before) so a draw maps to a member via the shared
    weight prefix table.
    """

    __slots__ = ("cum", "blocks")

    def __init__(self, v: int, lattice: FloorLattice, W):
        self.cum: list[int] = []
        self.blocks: list[tuple[int, int, int]] = []
        total = 0
        q = 2
        while q <= v:
            u = v // q
            qmax = v // u
            wsum = int(W[qmax] - W[q - 1])
            if wsum:
                A_u = lattice.values[u] if u > 1 else 1
                total += wsum * A_u
                self.cum.append(total)
                self.blocks.append((u, A_u, int(W[q - 1])))
            q = qmax + 1


class FactorizationSampler:
    """Reusable exact sampler for one (spec, N)."""

    def __init__(
        self,
        spec: FactorSetSpec,
        N: int,
        lattice: FloorLattice | None = None,
        seed: int | None = None,
        rng: random.Random | None = None,
    ):
        self.spec = spec
        self.N = N
        self.lattice = lattice if lattice is not None else floor_lattice(spec, N)
        self.rng = rng if rng is not None else random.Random(seed)
        self.seed = seed
        self.rng_algorithm = RNG_ALGORITHM
        self._W = weight_prefix_array(spec, N)
        self._tables: dict[int, _StateTable] = {}

    def _table(self, v: int) -> _StateTable:
        t = self._tables.get(v)
        if t is None:
            t = _StateTable(v, self.lattice, self._W)
            self._tables[v] = t
        return t

    def sample(self) -> SampleRecord:
        v = self.N
        factors: list[int] = []
        product = 1
        while True:
            A_v = self.lattice.values[v] if v > 1 else 1
            u_draw = self.rng.randrange(A_v)
            if u_draw == 0:
                return SampleRecord(tuple(factors), product, len(factors))
            t = u_draw - 1
            table = self._table(v)
            i = bisect.bisect_right(table.cum, t)
            offset = t - (table.cum[i - 1] if i else 0)
            u, A_u, W_before = table.blocks[i]
            slot = offset // A_u
            q = int(np.searchsorted(self._W, W_before + slot, side="right"))
            factors.append(q)
            product *= q
            v = u

    def sample_many(self, count: int) -> list[SampleRecord]:
        return [self.sample() for _ in range(count)]


_decoders: "weakref.WeakKeyDictionary[FloorLattice, dict]" = weakref.WeakKeyDictionary()


def sample_factorization(
    spec: FactorSetSpec, N: int, lattice: FloorLattice, rng: random.Random
) -> SampleRecord:
    """One exact-uniform draw; decoder tables are cached on the lattice."""
    cache = _decoders.setdefault(lattice, {})
    sampler = cache.get("sampler")
    if sampler is None or sampler.spec != spec or sampler.N != N:
        sampler = FactorizationSampler(spec, N, lattice, rng=rng)
        cache["sampler"] = sampler
    sampler.rng = rng
    return sampler.sample()


def decode_probability(
    spec: FactorSetSpec, N: int, lattice: FloorLattice, factors: tuple[int, ...]
) -> Fraction:
    """Exact probability that the decoder emits this factor sequence.

    Telescopes to prod_i w(q_i) / A(N); the tests verify this equals
    1/A(N) for unit-weight sets, factorization by factorization.
    """
    W = weight_prefix_array(spec, N)
    p = Fraction(1)
    v = N
    for q in factors:
        w = int(W[q] - W[q - 1])
        u = v // q
        A_v = lattice.values[v] if v > 1 else 1
        A_u = lattice.values[u] if u > 1 else 1
        p *= Fraction(w * A_u, A_v)
        v = u
    A_v = lattice.values[v] if v > 1 else 1
    return p * Fraction(1, A_v)


# -- goodness of fit ----------------------------------------------------------


def empirical_distribution(samples: list[SampleRecord]) -> dict[int, int]:
    """Histogram of the factor-count m."""
    hist: dict[int, int] = {}
    for s in samples:
        hist[s.m] = hist.get(s.m, 0) + 1
    return hist


@dataclass(frozen=True)
class GofReport:
    statistic: float
    p_value: float
    dof: int
    bins: int


def chi_square_gof(histogram: dict[int, int], masses) -> GofReport:
    """Pearson chi-square of a sampled histogram against exact masses.

    `masses` is the exact law indexed by m (Fractions or floats summing
    to 1); adjacent bins are pooled until every expected count is >= 5.
    """
    masses = getattr(masses, "masses", masses)
    total = sum(histogram.values())
    if total < 1:
        raise ValueError("empty histogram")
    m_max = len(masses) - 1
    if any(m > m_max or m < 0 for m in histogram):
        raise ValueError("histogram contains m outside the exact support")

    pooled: list[tuple[float, float]] = []
    obs_acc = 0.0
    exp_acc = 0.0
    for m in range(m_max + 1):
        obs_acc += histogram.get(m, 0)
        exp_acc += float(masses[m]) * total
        if exp_acc >= 5:
            pooled.append((obs_acc, exp_acc))
            obs_acc = exp_acc = 0.0
    if obs_acc or exp_acc:
        if pooled:
            o, e = pooled[-1]
            pooled[-1] = (o + obs_acc, e + exp_acc)
        else:
            pooled.append((obs_acc, exp_acc))
    if len(pooled) < 2:
        raise ValueError("degenerate: only one pooled bin")

    stat = sum((o - e) ** 2 / e for o, e in pooled)
    dof = len(pooled) - 1
    return GofReport(statistic=stat, p_value=float(chi2.sf(stat, dof)), dof=dof, bins=len(pooled))
