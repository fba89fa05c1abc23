"""Factor multisets and their elementary interrogation.

A factor set is a multiset of integers >= 2 from which ordered factorizations
draw their factors.  Built-in infinite families (all integers, primes,
squarefree integers, totient values) are handled alongside finite explicit
and weighted sets and geometric progressions d, d^2, d^3, ...

The totient family weights w(q) = #{m >= 3 : phi(m) = q}.  Since phi(m) = 1
only for m in {1, 2}, restricting to m >= 3 is the same as keeping the
weights supported on q >= 2.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import ResourceCapError, UsageError

# Largest phi pre-image sieve (2*bound^2 entries) the oracle sieve will build.
TOTIENT_SIEVE_CAP = 1 << 26

KAPPA_NEG_INF = float("-inf")


class Family(enum.Enum):
    EXPLICIT = "explicit"
    ALL_INTEGERS = "all"
    PRIMES = "primes"
    SQUAREFREE = "squarefree"
    POWERS_OF = "powers"
    TOTIENT = "totient"
    WEIGHTED = "weighted"


INFINITE_BUILTINS = (Family.ALL_INTEGERS, Family.PRIMES, Family.SQUAREFREE, Family.TOTIENT)


@dataclass(frozen=True)
class FactorSetSpec:
    """Immutable description of one factor multiset."""

    family: Family
    members: tuple[int, ...] = ()            # EXPLICIT only, strictly increasing
    weights: tuple[tuple[int, int], ...] = ()  # WEIGHTED only, sorted (q, w) pairs
    base: int = 0                            # POWERS_OF only

    def __post_init__(self):
        if self.family is Family.EXPLICIT:
            if not self.members:
                raise UsageError("explicit factor set must be nonempty")
            if any(q < 2 for q in self.members):
                raise UsageError("explicit members must all be >= 2")
            if any(a >= b for a, b in zip(self.members, self.members[1:])):
                raise UsageError("explicit members must be strictly increasing")
        elif self.family is Family.WEIGHTED:
            if not self.weights:
                raise UsageError("weighted factor set must be nonempty")
            for q, w in self.weights:
                if q < 2:
                    raise UsageError("weighted keys must be >= 2")
                if w < 1:
                    raise UsageError("weights must be >= 1")
            qs = [q for q, _ in self.weights]
            if qs != sorted(set(qs)):
                raise UsageError("weighted keys must be distinct")
        elif self.family is Family.POWERS_OF:
            if self.base < 2:
                raise UsageError("powers base must be >= 2")

    # -- constructors ------------------------------------------------------

    @classmethod
    def all_integers(cls) -> "FactorSetSpec":
        return cls(Family.ALL_INTEGERS)

    @classmethod
    def primes(cls) -> "FactorSetSpec":
        return cls(Family.PRIMES)

    @classmethod
    def squarefree(cls) -> "FactorSetSpec":
        return cls(Family.SQUAREFREE)

    @classmethod
    def totient(cls) -> "FactorSetSpec":
        return cls(Family.TOTIENT)

    @classmethod
    def powers_of(cls, d: int) -> "FactorSetSpec":
        return cls(Family.POWERS_OF, base=d)

    @classmethod
    def explicit(cls, members) -> "FactorSetSpec":
        return cls(Family.EXPLICIT, members=tuple(sorted(set(int(q) for q in members))))

    @classmethod
    def weighted(cls, mapping) -> "FactorSetSpec":
        pairs = tuple(sorted((int(q), int(w)) for q, w in dict(mapping).items()))
        return cls(Family.WEIGHTED, weights=pairs)

    # -- canonical string --------------------------------------------------

    def spec_string(self) -> str:
        """Canonical form of the CLI/JSON grammar for this set."""
        if self.family is Family.EXPLICIT:
            return "explicit:" + ",".join(str(q) for q in self.members)
        if self.family is Family.WEIGHTED:
            return "weighted:" + ",".join(f"{q}={w}" for q, w in self.weights)
        if self.family is Family.POWERS_OF:
            return f"powers:{self.base}"
        return self.family.value

    def __str__(self) -> str:
        return self.spec_string()


def parse_spec_string(text: str) -> FactorSetSpec:
    """Parse `all|primes|squarefree|totient|powers:<d>|explicit:...|weighted:...`."""
    text = text.strip().lower()
    if text == "all":
        return FactorSetSpec.all_integers()
    if text == "primes":
        return FactorSetSpec.primes()
    if text == "squarefree":
        return FactorSetSpec.squarefree()
    if text == "totient":
        return FactorSetSpec.totient()
    head, sep, tail = text.partition(":")
    if not sep:
        raise UsageError(f"unknown factor set {text!r}")
    try:
        if head == "powers":
            return FactorSetSpec.powers_of(int(tail))
        if head == "explicit":
            return FactorSetSpec.explicit(int(q) for q in tail.split(","))
        if head == "weighted":
            mapping = {}
            for item in tail.split(","):
                q, _, w = item.partition("=")
                mapping[int(q)] = int(w)
            return FactorSetSpec.weighted(mapping)
    except ValueError as exc:
        raise UsageError(f"malformed factor set {text!r}: {exc}") from None
    raise UsageError(f"unknown factor set {text!r}")


# -- applicability ---------------------------------------------------------


class Reason(enum.Enum):
    OK = "ok"
    SINGLETON_SET = "singleton-set"
    PERIODIC_IN_POWERS_OF_D = "periodic-in-powers-of-d"
    NO_ROOT = "no-root"


@dataclass(frozen=True)
class Applicability:
    """Whether the normal-limit theorem's hypotheses hold for a spec."""

    theorem_applies: bool
    reason: Reason
    period_base: int | None = None

    def __post_init__(self):
        assert self.theorem_applies == (self.reason is Reason.OK)


# -- sieves (module-level helpers, cached by callers as needed) ------------


def prime_sieve(limit: int) -> np.ndarray:
    """Boolean array b with b[n] true iff n is prime, n <= limit."""
    b = np.zeros(max(limit, 1) + 1, dtype=bool)
    if limit >= 2:
        b[2:] = True
        for p in range(2, math.isqrt(limit) + 1):
            if b[p]:
                b[p * p :: p] = False
    return b


def squarefree_sieve(limit: int) -> np.ndarray:
    """Boolean array b with b[n] true iff n is squarefree, n <= limit."""
    b = np.ones(max(limit, 1) + 1, dtype=bool)
    b[0] = False
    for p in range(2, math.isqrt(limit) + 1):
        b[p * p :: p * p] = False
    return b


def totient_sieve(limit: int) -> np.ndarray:
    """phi(m) for m = 0..limit by the standard multiplicative sieve."""
    if limit + 1 > TOTIENT_SIEVE_CAP:
        raise ResourceCapError(
            f"totient sieve of {limit + 1} entries exceeds cap {TOTIENT_SIEVE_CAP}"
        )
    phi = np.arange(limit + 1, dtype=np.int64)
    for p in range(2, limit + 1):
        if phi[p] == p:  # p prime
            phi[p::p] -= phi[p::p] // p
    return phi


def totient_weights_upto(bound: int) -> dict[int, int]:
    """w(q) = #{m >= 3 : phi(m) = q} for all q <= bound.

    Enumerates totient pre-images directly: every m factors as a product of
    prime powers p^e contributing (p-1)p^(e-1) to phi(m), and only primes
    with p - 1 <= bound can appear.  The search tree is linear in the number
    of pre-images, so this scales where the 2*bound^2 sieve cannot.
    """
    if bound < 2:
        return {}
    primes = np.flatnonzero(prime_sieve(bound + 1)).tolist()
    counts: dict[int, int] = {}

    def descend(idx: int, phi_val: int):
        if 2 <= phi_val <= bound:
            counts[phi_val] = counts.get(phi_val, 0) + 1
        for i in range(idx, len(primes)):
            p = primes[i]
            f = phi_val * (p - 1)
            if f > bound:
                break
            while f <= bound:
                descend(i + 1, f)
                f *= p

    descend(0, 1)
    return counts


def totient_weight_single(q: int) -> int:
    """#{m >= 3 : phi(m) = q} by sieving phi over m <= 2q^2 (phi(m) >= sqrt(m/2))."""
    if q < 2:
        return 0
    limit = 2 * q * q
    phi = totient_sieve(limit)
    return int(np.count_nonzero(phi[3:] == q))


# -- the module operations -------------------------------------------------


def weight(spec: FactorSetSpec, q: int) -> int:
    """Multiplicity w(q) of q in the factor multiset (0 if absent)."""
    if q < 2:
        raise ValueError("factors start at 2")
    f = spec.family
    if f is Family.ALL_INTEGERS:
        return 1
    if f is Family.EXPLICIT:
        return 1 if q in spec.members else 0
    if f is Family.WEIGHTED:
        return dict(spec.weights).get(q, 0)
    if f is Family.PRIMES:
        return 1 if bool(prime_sieve(q)[q]) else 0
    if f is Family.SQUAREFREE:
        return 1 if bool(squarefree_sieve(q)[q]) else 0
    if f is Family.POWERS_OF:
        v = q
        while v % spec.base == 0:
            v //= spec.base
        return 1 if v == 1 else 0
    if f is Family.TOTIENT:
        return totient_weight_single(q)
    raise AssertionError(f)


def enumerate_members(spec: FactorSetSpec, bound: int) -> list[tuple[int, int]]:
    """All (q, w(q)) with q <= bound and w(q) >= 1, ascending in q."""
    if bound < 2:
        return []
    f = spec.family
    if f is Family.ALL_INTEGERS:
        return [(q, 1) for q in range(2, bound + 1)]
    if f is Family.EXPLICIT:
        return [(q, 1) for q in spec.members if q <= bound]
    if f is Family.WEIGHTED:
        return [(q, w) for q, w in spec.weights if q <= bound]
    if f is Family.PRIMES:
        return [(int(q), 1) for q in np.flatnonzero(prime_sieve(bound))]
    if f is Family.SQUAREFREE:
        return [(int(q), 1) for q in np.flatnonzero(squarefree_sieve(bound)) if q >= 2]
    if f is Family.POWERS_OF:
        out = []
        v = spec.base
        while v <= bound:
            out.append((v, 1))
            v *= spec.base
        return out
    if f is Family.TOTIENT:
        counts = totient_weights_upto(bound)
        return sorted(counts.items())
    raise AssertionError(f)


def weight_prefix_array(spec: FactorSetSpec, bound: int) -> np.ndarray:
    """W[x] = sum of w(q) over members q <= x, for x = 0..bound."""
    if spec.family is Family.ALL_INTEGERS:
        return np.maximum(np.arange(bound + 1, dtype=np.int64) - 1, 0)
    if spec.family is Family.PRIMES:
        return np.cumsum(prime_sieve(bound).astype(np.int64))[: bound + 1]
    if spec.family is Family.SQUAREFREE:
        b = squarefree_sieve(bound)
        if bound >= 1:
            b[1] = False
        return np.cumsum(b.astype(np.int64))[: bound + 1]
    W = np.zeros(bound + 1, dtype=np.int64)
    for q, w in enumerate_members(spec, bound):
        W[q] = w
    np.cumsum(W, out=W)
    return W


def iter_member_values(spec: FactorSetSpec, bound: int) -> Iterator[int]:
    for q, _ in enumerate_members(spec, bound):
        yield q


def _common_power_base(values: list[int]) -> int | None:
    """Smallest d >= 2 with every value a power of d, or None."""
    q1 = values[0]
    for j in range(q1.bit_length() - 1, 0, -1):
        d = round(q1 ** (1.0 / j))
        for cand in (d - 1, d, d + 1):
            if cand >= 2 and cand**j == q1:
                if all(_is_power_of(v, cand) for v in values):
                    return cand
    return None


def _is_power_of(v: int, d: int) -> bool:
    while v % d == 0:
        v //= d
    return v == 1


def detect_periodicity(spec: FactorSetSpec, probe_bound: int = 2) -> Applicability:
    """Check the non-degeneracy hypotheses: at least two members, not all
    powers of a common base.

    The infinite built-in families provably contain coprime members, so they
    are reported applicable without probing.  Finite sets are inspected in
    full (probe_bound is irrelevant when every member is known).
    """
    del probe_bound  # finite sets are fully known; infinite ones hard-coded
    f = spec.family
    if f in INFINITE_BUILTINS:
        return Applicability(True, Reason.OK)
    if f is Family.POWERS_OF:
        base = _common_power_base([spec.base])
        return Applicability(False, Reason.PERIODIC_IN_POWERS_OF_D, period_base=base)
    values = [q for q, _ in _all_finite_members(spec)]
    if len(values) == 1:
        return Applicability(False, Reason.SINGLETON_SET)
    base = _common_power_base(values)
    if base is not None:
        return Applicability(False, Reason.PERIODIC_IN_POWERS_OF_D, period_base=base)
    return Applicability(True, Reason.OK)


def _all_finite_members(spec: FactorSetSpec) -> list[tuple[int, int]]:
    if spec.family is Family.EXPLICIT:
        return [(q, 1) for q in spec.members]
    if spec.family is Family.WEIGHTED:
        return list(spec.weights)
    raise ValueError("finite member list only defined for explicit/weighted sets")


def kappa(spec: FactorSetSpec) -> float:
    """Abscissa of convergence of the set's Dirichlet series.

    -inf for finite sets, 0 for geometric progressions, 1 for the dense
    built-in families.
    """
    f = spec.family
    if f in (Family.EXPLICIT, Family.WEIGHTED):
        return KAPPA_NEG_INF
    if f is Family.POWERS_OF:
        return 0.0
    return 1.0
