"""Layered unbalanced bipartite expanders given by a function table C: [N]x[D] -> [M].

Left vertex ``j`` has exactly one neighbour in every layer (seed) ``s``,
namely right vertex ``C(j, s)`` of that layer. A uniformly random table is an
expander with high probability; nothing here proves expansion, but the two
audit functions check it empirically.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from . import kernels

ENUMERATION_CAP = 10**7
_CHUNK = 1 << 16


class EnumerationTooLarge(ValueError):
    """The exhaustive check would enumerate more subsets than allowed."""


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


def _log2(n: int):
    # exact for powers of two so the default formulas don't pick up float noise
    if n & (n - 1) == 0:
        return Fraction(n.bit_length() - 1)
    return Fraction(math.log2(n))


def default_degree(N: int, epsilon) -> int:
    return max(1, math.ceil(2 * _log2(N) / as_fraction(epsilon)))


def default_layer_size(K: int, epsilon) -> int:
    return max(1, math.ceil(4 * K / as_fraction(epsilon)))


@dataclass(frozen=True)
class ExpanderParams:
    N: int
    D: int
    M: int
    K: int
    epsilon: Fraction

    def __post_init__(self):
        object.__setattr__(self, "epsilon", as_fraction(self.epsilon))
        if self.N < 2:
            raise ValueError(f"N must be at least 2, got {self.N}")
        if self.D < 1 or self.M < 1:
            raise ValueError(f"D and M must be positive, got D={self.D}, M={self.M}")
        if self.M >= 1 << 31:
            raise ValueError("M must fit in 31 bits")
        if not 1 <= self.K <= self.N:
            raise ValueError(f"K must lie in [1, N], got {self.K}")
        if not 0 < self.epsilon < Fraction(1, 2):
            raise ValueError(f"epsilon must lie in (0, 1/2), got {self.epsilon}")

    @classmethod
    def with_defaults(cls, N: int, K: int, epsilon, D: int | None = None, M: int | None = None):
        """Fill in D = ceil(2 log2 N / eps) and M = ceil(4K / eps) unless given."""
        eps = as_fraction(epsilon)
        if not 0 < eps < Fraction(1, 2):
            raise ValueError(f"epsilon must lie in (0, 1/2), got {eps}")
        D = default_degree(N, eps) if D is None else D
        M = default_layer_size(K, eps) if M is None else M
        return cls(N, D, M, K, eps)


class Expander:
    """Shared behaviour of the dense and hashed expanders.

    Subclasses provide ``neighbors(js)`` returning a ``(len(js), D)`` array
    and ``layer(s)`` returning the length-N array ``C(., s)``.
    """

    params: ExpanderParams

    @property
    def N(self):
        return self.params.N

    @property
    def D(self):
        return self.params.D

    @property
    def M(self):
        return self.params.M

    def _check_left(self, j):
        if not 0 <= j < self.N:
            raise IndexError(f"left index {j} outside [0, {self.N})")

    def _check_seed(self, s):
        if not 0 <= s < self.D:
            raise IndexError(f"seed {s} outside [0, {self.D})")

    def neighbor(self, j: int, s: int) -> int:
        self._check_left(j)
        self._check_seed(s)
        return int(self.neighbors(np.array([j]))[0, s])

    def seed_neighborhood_size(self, support, s: int) -> int:
        self._check_seed(s)
        support = np.asarray(sorted(set(int(j) for j in support)), dtype=np.int64)
        if support.size == 0:
            return 0
        if support[0] < 0 or support[-1] >= self.N:
            raise IndexError("support index out of range")
        return int(np.unique(self.neighbors(support)[:, s]).size)

    def neighborhood_size(self, support) -> int:
        """|Gamma(S)| summed over all layers."""
        return sum(self.seed_neighborhood_size(support, s) for s in range(self.D))


class LayeredExpander(Expander):
    """Expander backed by an explicit ``(N, D)`` table (flat index ``j*D + s``)."""

    def __init__(self, params: ExpanderParams, table: np.ndarray, rng_seed: int | None = None):
        table = np.ascontiguousarray(table, dtype=np.int32)
        if table.shape != (params.N, params.D):
            raise ValueError(f"table shape {table.shape} != {(params.N, params.D)}")
        if table.size and (table.min() < 0 or table.max() >= params.M):
            raise ValueError("table entries must lie in [0, M)")
        table.flags.writeable = False
        self.params = params
        self.table = table
        self.rng_seed = rng_seed
        self._layers = {}

    kind = "dense"

    def neighbors(self, js) -> np.ndarray:
        return self.table[np.asarray(js, dtype=np.int64)]

    def layer(self, s: int) -> np.ndarray:
        self._check_seed(s)
        lay = self._layers.get(s)
        if lay is None:
            lay = np.ascontiguousarray(self.table[:, s], dtype=np.int64)
            self._layers[s] = lay
        return lay

    def __eq__(self, other):
        return (
            isinstance(other, LayeredExpander)
            and self.params == other.params
            and np.array_equal(self.table, other.table)
        )

    __hash__ = None


def _splitmix64(z: np.ndarray) -> np.ndarray:
    z = z + np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


class HashedExpander(Expander):
    """Implicit expander: C(j, s) = splitmix64(key, j*D + s) mod M.

    Same interface as ``LayeredExpander`` without the N*D table, for block
    lengths where the table does not fit in memory.
    """

    kind = "hashed"

    def __init__(self, params: ExpanderParams, rng_seed: int):
        self.params = params
        self.rng_seed = int(rng_seed)
        self._key = _splitmix64(np.array([self.rng_seed], dtype=np.uint64))[0]

    def _hash(self, flat: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore"):
            h = _splitmix64(flat.astype(np.uint64) ^ self._key)
        return (h % np.uint64(self.M)).astype(np.int32)

    def neighbors(self, js) -> np.ndarray:
        js = np.asarray(js, dtype=np.int64)
        flat = js[:, None] * self.D + np.arange(self.D, dtype=np.int64)[None, :]
        return self._hash(flat)

    def layer(self, s: int) -> np.ndarray:
        self._check_seed(s)
        flat = np.arange(self.N, dtype=np.int64) * self.D + s
        return self._hash(flat).astype(np.int64)

    def materialize(self) -> LayeredExpander:
        return LayeredExpander(self.params, self.neighbors(np.arange(self.N)), self.rng_seed)

    def __eq__(self, other):
        return isinstance(other, HashedExpander) and (self.params, self.rng_seed) == (
            other.params,
            other.rng_seed,
        )

    def __hash__(self):
        return hash((self.params, self.rng_seed))


def sample_expander(params: ExpanderParams, seed: int) -> LayeredExpander:
    """Fill the function table with i.i.d. uniform values in [0, M)."""
    rng = np.random.default_rng(seed)
    table = rng.integers(0, params.M, size=(params.N, params.D), dtype=np.int32)
    return LayeredExpander(params, table, rng_seed=seed)


def neighbor(g: Expander, j: int, s: int) -> int:
    return g.neighbor(j, s)


def seed_neighborhood_size(g: Expander, support, s: int) -> int:
    return g.seed_neighborhood_size(support, s)


def _all_neighbors(g: Expander) -> np.ndarray:
    if isinstance(g, LayeredExpander):
        return g.table
    return g.neighbors(np.arange(g.N))


def _combination_chunks(n: int, k: int):
    it = itertools.combinations(range(n), k)
    while True:
        chunk = np.fromiter(itertools.chain.from_iterable(itertools.islice(it, _CHUNK)), dtype=np.int64)
        if chunk.size == 0:
            return
        yield chunk.reshape(-1, k)


def verify_expansion_bruteforce(g: Expander, K: int, epsilon) -> bool:
    """Check |Gamma(S)| >= (1 - eps) D |S| for every S with |S| <= K."""
    eps = as_fraction(epsilon)
    N, D = g.N, g.D
    K = min(K, N)
    total = sum(comb(N, k) for k in range(K + 1))
    if total > ENUMERATION_CAP:
        raise EnumerationTooLarge(
            f"{total} subsets exceed the cap of {ENUMERATION_CAP}; use audit_expansion_montecarlo"
        )
    nbrs = _all_neighbors(g)
    for k in range(2, K + 1):
        need = math.ceil((1 - eps) * D * k)
        for chunk in _combination_chunks(N, k):
            if np.any(kernels.expansion_counts(nbrs, chunk) < need):
                return False
    # singletons always have exactly D neighbours
    return True


def audit_expansion_montecarlo(g: Expander, K: int, epsilon, trials: int, rng_seed: int) -> float:
    """Fraction of random subsets (size uniform in 1..K) that satisfy the expansion bound."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    eps = as_fraction(epsilon)
    rng = np.random.default_rng(rng_seed)
    K = min(K, g.N)
    passed = 0
    for _ in range(trials):
        k = int(rng.integers(1, K + 1))
        subset = np.sort(rng.choice(g.N, size=k, replace=False))
        count = int(kernels.expansion_counts(g.neighbors(subset), np.arange(k)[None, :])[0])
        if count >= math.ceil((1 - eps) * g.D * k):
            passed += 1
    return passed / trials
