"""Non-adaptive group testing with a bitmasked disjunct matrix.

The test matrix stacks a K-disjunct matrix ``W'`` (M_gt pools) on top of
``W' (x) B``: every pool is repeated lam times, sub-test ``t`` keeping only
the items whose index has bit ``t`` set. A pool containing exactly one
defective therefore spells out that defective's index, which gives a small
candidate set; candidates that sit in some negative pool are then dropped.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from . import kernels
from .bitmask import BitLayout

ENUMERATION_CAP = 10**7


def default_test_count(N: int, K: int) -> int:
    """ceil(3 (K+1)^2 ln N) pools."""
    return math.ceil(3 * (K + 1) ** 2 * math.log(N))


class DisjunctMatrix:
    """Boolean pool matrix stored as column supports (CSR) with the row index derived."""

    def __init__(self, N: int, T: int, indptr, indices, K: int | None = None,
                 rng_seed: int | None = None, p: Fraction | None = None):
        self.N, self.T = int(N), int(T)
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        if self.indptr.shape != (self.N + 1,) or self.indptr[0] != 0 or self.indptr[-1] != self.indices.size:
            raise ValueError("malformed column pointer array")
        if self.indices.size and (self.indices.min() < 0 or self.indices.max() >= self.T):
            raise ValueError("pool index out of range")
        self.K, self.rng_seed, self.p = K, rng_seed, p
        cols = np.repeat(np.arange(self.N, dtype=np.int64), np.diff(self.indptr))
        order = np.lexsort((cols, self.indices))
        self.row_indices = cols[order]
        self.row_indptr = np.concatenate([[0], np.cumsum(np.bincount(self.indices, minlength=self.T))])

    @classmethod
    def from_dense(cls, mat, **kw):
        mat = np.asarray(mat, dtype=bool)
        T, N = mat.shape
        rows, cols = np.nonzero(mat.T)  # column-major walk
        indptr = np.concatenate([[0], np.cumsum(np.bincount(rows, minlength=N))])
        return cls(N, T, indptr, cols, **kw)

    def to_dense(self) -> np.ndarray:
        mat = np.zeros((self.T, self.N), dtype=bool)
        cols = np.repeat(np.arange(self.N), np.diff(self.indptr))
        mat[self.indices, cols] = True
        return mat

    def column(self, j: int) -> np.ndarray:
        return self.indices[self.indptr[j]:self.indptr[j + 1]]

    def row(self, q: int) -> np.ndarray:
        return self.row_indices[self.row_indptr[q]:self.row_indptr[q + 1]]

    @property
    def column_weights(self) -> np.ndarray:
        return np.diff(self.indptr)

    def __eq__(self, other):
        if not isinstance(other, DisjunctMatrix):
            return NotImplemented
        return (self.N, self.T) == (other.N, other.T) and np.array_equal(
            self.indptr, other.indptr) and np.array_equal(self.indices, other.indices)

    __hash__ = None

    def __repr__(self):
        return f"DisjunctMatrix(N={self.N}, T={self.T}, nnz={self.indices.size})"


def sample_disjunct(N: int, K: int, T: int, rng) -> DisjunctMatrix:
    """Each entry is 1 independently with probability 1/(K+1)."""
    if T < 1:
        raise ValueError("T must be at least 1")
    if K < 0:
        raise ValueError("K must be non-negative")
    seed = rng if isinstance(rng, (int, np.integer)) else None
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    p = Fraction(1, K + 1)
    mat = gen.random((T, N)) < float(p)
    return DisjunctMatrix.from_dense(mat, K=K, rng_seed=seed, p=p)


def verify_disjunct_bruteforce(W: DisjunctMatrix, K: int) -> bool:
    """No column is covered by the union of any K (or fewer) other columns."""
    N = W.N
    total = sum(comb(N, k) for k in range(K + 1)) * N
    if total > ENUMERATION_CAP:
        raise ValueError(f"{total} containment checks exceed the cap of {ENUMERATION_CAP}")
    masks = [sum(1 << int(q) for q in W.column(j)) for j in range(N)]
    k = min(K, N - 1)
    for c in range(N):
        col = masks[c]
        others = [masks[j] for j in range(N) if j != c]
        if k == 0:
            if col == 0:
                return False
            continue
        for group in itertools.combinations(others, k):
            union = 0
            for m in group:
                union |= m
            if col & ~union == 0:
                return False
    return True


@dataclass(eq=False)
class OutcomeVector:
    y1: np.ndarray  # (M_gt,) pool outcomes
    y2: np.ndarray  # (M_gt, lam) masked sub-test outcomes

    def __post_init__(self):
        self.y1 = np.asarray(self.y1, dtype=np.uint8)
        self.y2 = np.asarray(self.y2, dtype=np.uint8).reshape(self.y1.size, -1)
        if np.any(self.y2[self.y1 == 0]):
            raise ValueError("a negative pool has a positive masked sub-test")

    @property
    def lam(self) -> int:
        return self.y2.shape[1]

    def __eq__(self, other):
        if not isinstance(other, OutcomeVector):
            return NotImplemented
        return np.array_equal(self.y1, other.y1) and np.array_equal(self.y2, other.y2)

    __hash__ = None


def outcomes(W: DisjunctMatrix, layout: BitLayout, defectives) -> OutcomeVector:
    """y1 = OR of the defective columns; y2(q, t) = OR over defectives j in pool q of bit t of j."""
    if layout.N != W.N:
        raise ValueError("bit layout and matrix disagree on N")
    y1 = np.zeros(W.T, dtype=np.uint8)
    y2 = np.zeros((W.T, layout.lam), dtype=np.uint8)
    for j in sorted(set(int(d) for d in defectives)):
        if not 0 <= j < W.N:
            raise IndexError(f"item {j} outside [0, {W.N})")
        pools = W.column(j)
        y1[pools] = 1
        y2[pools] |= layout.bits([j])[0]
    return OutcomeVector(y1, y2)


def superset(out: OutcomeVector, layout: BitLayout) -> set:
    """Decode one candidate per positive pool; indices >= N are dropped."""
    return set(kernels.superset_decode(out.y1, out.y2, layout.N).tolist())


def remove_false_positives(out: OutcomeVector, W: DisjunctMatrix, candidates, stats: dict | None = None) -> set:
    """Keep the candidates whose every pool tested positive."""
    cand = np.array(sorted(int(c) for c in candidates), dtype=np.int64)
    if cand.size and (cand[0] < 0 or cand[-1] >= W.N):
        raise IndexError("candidate outside [0, N)")
    kept, checks = kernels.remove_candidates(W.indptr, W.indices, out.y1, cand)
    if stats is not None:
        stats["checks"] = stats.get("checks", 0) + int(checks)
        stats["candidates"] = stats.get("candidates", 0) + int(cand.size)
    return set(kept.tolist())


def recover(out: OutcomeVector, W: DisjunctMatrix, layout: BitLayout, stats: dict | None = None) -> set:
    return remove_false_positives(out, W, superset(out, layout), stats)


def spot_audit(W: DisjunctMatrix, defectives) -> bool:
    """Whether disjunctness holds locally for this defective set.

    True iff every defective has a pool free of the other defectives and no
    other item is covered by the defectives' pools. Together these
    guarantee that ``recover`` returns the defective set, so a failed
    recovery with a passing audit would be a bug rather than bad luck.
    """
    S = sorted(set(int(d) for d in defectives))
    hit = np.zeros(W.T, dtype=np.int64)
    for j in S:
        hit[W.column(j)] += 1
    for j in S:
        if not np.any(hit[W.column(j)] == 1):
            return False
    covered = hit > 0
    S_set = set(S)
    for j in range(W.N):
        if j not in S_set and np.all(covered[W.column(j)]):
            return False
    return True


class GroupTestScheme:
    """A sampled test design for N items and at most K defectives (K >= 1)."""

    def __init__(self, W: DisjunctMatrix, K: int):
        if K < 1:
            raise ValueError("K must be at least 1")
        self.W, self.K = W, K
        self.layout = BitLayout(W.N)

    @classmethod
    def sample(cls, N: int, K: int, rng, T: int | None = None):
        if K < 1:
            raise ValueError("K must be at least 1")
        T = default_test_count(N, K) if T is None else T
        return cls(sample_disjunct(N, K, T, rng), K)

    @property
    def total_tests(self) -> int:
        return self.W.T * (1 + self.layout.lam)

    def run_tests(self, defectives) -> OutcomeVector:
        return outcomes(self.W, self.layout, defectives)

    def recover(self, out: OutcomeVector, stats: dict | None = None) -> set:
        return recover(out, self.W, self.layout, stats)
