"""Exact counting of ordered factorizations.

a(n) counts ordered sequences of factors from the multiset whose product is
n (a(1) = 1, the empty sequence), a_m(n) the sequences of length exactly m,
A(N) and T_m(N) their partial sums over n <= N.

Three independent routes are implemented and cross-checked by the tests:

* a forward sieve, exact Python integers, sequential in n;
* a layered sieve (length-m slices), numpy int64 with an a-priori
  certificate that no value can exceed int64, falling back to exact
  object arrays otherwise;
* the floor-lattice recursion A(v) = 1 + sum_q w(q) A(v//q) evaluated on
  the O(sqrt(N)) distinct values v = N//k, with member blocks of constant
  v//q grouped through a cumulative-weight table.

plus an exhaustive first-factor enumeration as the ground-truth oracle for
small n.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np

from .errors import CountOverflowError, ResourceCapError
from .factorset import (
    FactorSetSpec,
    Family,
    enumerate_members,
    prime_sieve,
    squarefree_sieve,
    totient_weights_upto,
    weight_prefix_array,
)
from .spectral import SpectralConstants

INT64_SAFE_LIMIT = 1 << 62
CACHE_RECORD_BYTES = 16


class Centering(enum.Enum):
    MU_LOG_n = "mulogn"   # center each n at mu log n
    MU_LOG_N = "mulogN"   # center everything at mu log N


class WidthPolicy(enum.Enum):
    AUTO = "auto"      # int64 fast path when certified safe, else big ints
    INT64 = "int64"    # error out instead of leaving the fast path
    BIGINT = "bigint"  # exact Python integers throughout


@dataclass(frozen=True, eq=False)
class LayeredCounts:
    """Exact totals A(N) and per-length partial sums T_m(N)."""

    spec: FactorSetSpec
    N: int
    A_N: int
    T: tuple[int, ...]
    per_n: np.ndarray | None = None

    def __post_init__(self):
        assert sum(self.T) == self.A_N
        assert self.T[0] == 1
        assert len(self.T) - 1 <= int(math.log2(self.N)) if self.N > 1 else len(self.T) == 1

    @property
    def m_max(self) -> int:
        return len(self.T) - 1

    def masses(self):
        """Exact law of the factor-count: Fraction masses T_m/A(N)."""
        from fractions import Fraction

        return [Fraction(t, self.A_N) for t in self.T]


@dataclass(frozen=True, eq=False)
class FloorLattice:
    """A(v) on the distinct floor values v = N//k."""

    spec: FactorSetSpec
    N: int
    values: dict[int, int]

    @property
    def A_N(self) -> int:
        return self.values[self.N]

    def A(self, v: int) -> int:
        if v < 1:
            return 0
        try:
            return self.values[v]
        except KeyError:
            raise KeyError(f"{v} is not a floor value N//k for N={self.N}") from None


@dataclass(frozen=True, eq=False)
class CenteredSums:
    """sum over n <= N of sum_m a_m(n) (m - center(n))^k for k = 0..K."""

    spec: FactorSetSpec
    N: int
    K: int
    center: Centering
    sums: tuple[float, ...]


# -- member tables -----------------------------------------------------------


def _member_arrays(spec: FactorSetSpec, bound: int) -> tuple[np.ndarray, np.ndarray]:
    """(values, weights) int64 arrays of all members <= bound, ascending."""
    f = spec.family
    if f is Family.ALL_INTEGERS:
        qs = np.arange(2, bound + 1, dtype=np.int64)
        return qs, np.ones_like(qs)
    if f is Family.PRIMES:
        qs = np.flatnonzero(prime_sieve(bound)).astype(np.int64)
        return qs, np.ones_like(qs)
    if f is Family.SQUAREFREE:
        qs = np.flatnonzero(squarefree_sieve(bound)).astype(np.int64)
        qs = qs[qs >= 2]
        return qs, np.ones_like(qs)
    pairs = enumerate_members(spec, bound)
    qs = np.array([q for q, _ in pairs], dtype=np.int64)
    ws = np.array([w for _, w in pairs], dtype=np.int64)
    return qs, ws


# -- forward sieve (exact Python integers) -----------------------------------


def count_a(spec: FactorSetSpec, N: int, width: WidthPolicy = WidthPolicy.AUTO) -> tuple[list[int], int]:
    """Per-n counts a(1..N) and A(N) by the forward propagation sieve.

    Processing n ascending, a(n) is final when reached (every contribution
    comes from a proper divisor), and a(n) w(q) is pushed onto a(nq) for
    each member q.  Arithmetic is exact Python integers; the width policy
    only rejects results that would not fit the requested record width.
    """
    if N < 1:
        raise ValueError("N >= 1 required")
    a = [0] * (N + 1)
    a[1] = 1
    if spec.family is Family.ALL_INTEGERS:
        for n in range(1, N // 2 + 1):
            an = a[n]
            for m in range(2 * n, N + 1, n):
                a[m] += an
    else:
        qs, ws = _member_arrays(spec, N)
        members = list(zip(qs.tolist(), ws.tolist()))
        for n in range(1, N // 2 + 1):
            an = a[n]
            if an == 0:
                continue
            limit = N // n
            for q, w in members:
                if q > limit:
                    break
                a[n * q] += an * w
    A_N = sum(a)
    if width is WidthPolicy.INT64 and A_N >= INT64_SAFE_LIMIT:
        first = next(n for n in range(1, N + 1) if a[n].bit_length() >= 63)
        raise CountOverflowError(f"a({first}) exceeds the int64 width policy")
    return a, A_N


# -- layered sieve ------------------------------------------------------------


def _min_member(spec: FactorSetSpec, N: int) -> int:
    qs, _ = _member_arrays(spec, N)
    return int(qs[0]) if len(qs) else N + 1


def _iter_layers(spec: FactorSetSpec, N: int, dtype) -> Iterator[tuple[int, np.ndarray]]:
    """Yield (m, counts-by-n array) for m = 0, 1, ... until identically zero.

    The yielded buffer is reused between iterations; consumers must reduce
    it before advancing.
    """
    qs, ws = _member_arrays(spec, N)
    prev = np.zeros(N + 1, dtype=dtype)
    cur = np.zeros(N + 1, dtype=dtype)
    if dtype is object:
        prev[:] = 0
        cur[:] = 0
    prev[1] = 1
    yield 0, prev
    if len(qs) == 0:
        return
    minq = int(qs[0])
    lo = 1  # smallest n with a_{m-1}(n) > 0
    m = 1
    while lo * minq <= N:
        cur[:] = 0
        limit = N // lo
        for q, w in zip(qs.tolist(), ws.tolist()):
            if q > limit:
                break
            seg = prev[lo : N // q + 1]
            if w == 1:
                cur[q * lo :: q] += seg
            else:
                cur[q * lo :: q] += w * seg
        if not cur.any():
            return
        yield m, cur
        prev, cur = cur, prev
        lo *= minq
        m += 1


def certify_int64(spec: FactorSetSpec, N: int) -> bool:
    """True iff every intermediate of the sieve DP provably fits int64.

    All per-n and per-layer values are partial sums of nonnegative
    contributions bounded by A(N), so the exact floor-lattice A(N) is the
    certificate.
    """
    return floor_lattice(spec, N).A_N < INT64_SAFE_LIMIT


def count_layers(
    spec: FactorSetSpec,
    N: int,
    keep_per_n: bool = False,
    width: WidthPolicy = WidthPolicy.AUTO,
) -> LayeredCounts:
    """T_m(N) for every m with a nonzero layer, streaming two live layers."""
    if N < 1:
        raise ValueError("N >= 1 required")
    if width is WidthPolicy.BIGINT:
        dtype = object
    else:
        safe = certify_int64(spec, N)
        if not safe and width is WidthPolicy.INT64:
            raise CountOverflowError(
                f"A({N}) for {spec} exceeds the int64 width policy; "
                "use WidthPolicy.BIGINT"
            )
        dtype = np.int64 if safe else object
    T: list[int] = []
    totals = np.zeros(N + 1, dtype=dtype) if keep_per_n else None
    if totals is not None and dtype is object:
        totals[:] = 0
    for m, arr in _iter_layers(spec, N, dtype):
        T.append(int(arr.sum()))
        if totals is not None:
            totals += arr
    return LayeredCounts(spec=spec, N=N, A_N=sum(T), T=tuple(T), per_n=totals)


# -- floor lattice ------------------------------------------------------------


def floor_lattice(spec: FactorSetSpec, N: int) -> FloorLattice:
    """Exact A(v) on all distinct v = N//k via the self-similar recursion.

    The inner sum over members q <= v is grouped into blocks of constant
    v//q using the cumulative weight table W, so each state costs
    O(sqrt(v)) regardless of the family's density.
    """
    if N < 1:
        raise ValueError("N >= 1 required")
    W = weight_prefix_array(spec, N)
    Wl = W.tolist()

    vs: set[int] = set()
    k = 1
    while k <= N:
        v = N // k
        vs.add(v)
        k = N // v + 1
    A: dict[int, int] = {}
    for v in sorted(vs):
        total = 1  # the empty factorization
        q = 2
        while q <= v:
            u = v // q
            qmax = v // u
            wsum = Wl[qmax] - Wl[q - 1]
            if wsum:
                total += wsum * (A[u] if u > 1 else 1)
            q = qmax + 1
        A[v] = total
    if 1 not in A:
        A[1] = 1
    return FloorLattice(spec=spec, N=N, values=A)


# -- centered sums ------------------------------------------------------------


def centered_log_weighted_sums(
    spec: FactorSetSpec,
    N: int,
    K: int,
    J: int,
    constants: SpectralConstants,
    center: Centering = Centering.MU_LOG_n,
    width: WidthPolicy = WidthPolicy.AUTO,
) -> np.ndarray:
    """S[l, j] = sum_{n<=N} sum_m a_m(n) (m - center(n))^l (log(N/n))^j.

    One streaming pass over the layers; within a layer plain float64
    pairwise reductions, combined across layers by exact compensated
    summation (math.fsum).  Exact while A(N) < 2^53.
    """
    if K < 0 or J < 0:
        raise ValueError("K and J must be >= 0")
    mu = float(constants.mu)
    logn = np.zeros(N + 1)
    np.log(np.arange(1, N + 1), out=logn[1:])
    logN = math.log(N)
    center_vec = mu * logn if center is Centering.MU_LOG_n else np.full(N + 1, mu * logN)
    lw = logN - logn  # log(N/n)
    parts: list[list[list[float]]] = [[[] for _ in range(J + 1)] for _ in range(K + 1)]
    if width is WidthPolicy.BIGINT:
        dtype = object
    else:
        safe = certify_int64(spec, N)
        if not safe and width is WidthPolicy.INT64:
            raise CountOverflowError(f"A({N}) for {spec} exceeds the int64 width policy")
        dtype = np.int64 if safe else object
    for m, arr in _iter_layers(spec, N, dtype):
        Pl = arr.astype(np.float64)
        d = m - center_vec
        for l in range(K + 1):
            if J == 0:
                parts[l][0].append(float(Pl.sum()))
            else:
                Qj = Pl.copy()
                for j in range(J + 1):
                    parts[l][j].append(float(Qj.sum()))
                    if j < J:
                        Qj *= lw
            if l < K:
                Pl *= d
    out = np.empty((K + 1, J + 1))
    for l in range(K + 1):
        for j in range(J + 1):
            out[l, j] = math.fsum(parts[l][j])
    return out


def centered_sums(
    spec: FactorSetSpec,
    N: int,
    K: int,
    center: Centering,
    constants: SpectralConstants,
    width: WidthPolicy = WidthPolicy.AUTO,
) -> CenteredSums:
    """All centered power sums k = 0..K in a single pass."""
    S = centered_log_weighted_sums(spec, N, K, 0, constants, center, width)
    return CenteredSums(spec=spec, N=N, K=K, center=center, sums=tuple(float(x) for x in S[:, 0]))


# -- exhaustive oracle --------------------------------------------------------


@lru_cache(maxsize=64)
def _divisor_member_map(spec: FactorSetSpec, bound: int) -> dict[int, list[tuple[int, int]]]:
    """For every v <= bound, the member divisors (q, w(q)) of v with q >= 2."""
    table: dict[int, list[tuple[int, int]]] = {v: [] for v in range(1, bound + 1)}
    for q, w in enumerate_members(spec, bound):
        for v in range(q, bound + 1, q):
            table[v].append((q, w))
    return table


def brute_force_enumerate(spec: FactorSetSpec, n: int, cap: int = 2_000_000) -> list[tuple[int, ...]]:
    """Every ordered factorization of n, by exhaustive first-factor recursion.

    Weighted members contribute each sequence with multiplicity prod w(q_i),
    so the list length equals a(n) with weights accounted.
    """
    if n < 1:
        raise ValueError("n >= 1 required")
    if n > 10_000:
        raise ResourceCapError("exhaustive enumeration is capped at n <= 10000")
    table = _divisor_member_map(spec, n)
    out: list[tuple[int, ...]] = []

    def walk(v: int, prefix: tuple[int, ...]):
        if v == 1:
            if len(out) >= cap:
                raise ResourceCapError(f"more than {cap} factorizations of {n}")
            out.append(prefix)
            return
        for q, w in table[v]:
            for _ in range(w):
                walk(v // q, prefix + (q,))

    walk(n, ())
    return out


def brute_force_count(spec: FactorSetSpec, n: int, _table=None) -> int:
    """Leaf count of the exhaustive recursion (no memoization, no sieve)."""
    if n < 1:
        raise ValueError("n >= 1 required")
    table = _table if _table is not None else _divisor_member_map(spec, n)

    def walk(v: int) -> int:
        if v == 1:
            return 1
        return sum(w * walk(v // q) for q, w in table[v])

    return walk(n)


# -- binary per-n cache -------------------------------------------------------
#
# Record layout: for n = 1..N, byte offset (n-1)*16 holds a(n) as a 16-byte
# little-endian unsigned integer; n itself is implicit in the record index.


def save_counts_cache(path, counts: list[int]) -> None:
    """Write a(1..N) in the fixed-width little-endian record format."""
    with open(path, "wb") as fh:
        for n in range(1, len(counts)):
            c = counts[n]
            if c < 0 or c.bit_length() > 8 * CACHE_RECORD_BYTES:
                raise CountOverflowError(f"a({n}) does not fit a {CACHE_RECORD_BYTES}-byte record")
            fh.write(c.to_bytes(CACHE_RECORD_BYTES, "little"))


def load_counts_cache(path) -> list[int]:
    """Read back a(1..N); returns a list indexed by n with slot 0 unused."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) % CACHE_RECORD_BYTES:
        raise ValueError("truncated count cache")
    counts = [0]
    for off in range(0, len(blob), CACHE_RECORD_BYTES):
        counts.append(int.from_bytes(blob[off : off + CACHE_RECORD_BYTES], "little"))
    return counts
