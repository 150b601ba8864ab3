"""Bitmasked parity checks: H = [W; W (x) B] applied without building H.

Row ``q*lam + t`` of ``W (x) B`` is row ``q`` of ``W`` with column ``j``
multiplied by bit ``t`` of ``j`` (least significant bit first). For a layered
expander every seed ``s`` contributes a block ``W_s`` of ``M`` rows, so a
syndrome is stored seed-major:

* ``plain[s, q]``     = (W_s x)_q
* ``masked[s, q, t]`` = ((W_s (x) B) x)_{q*lam + t}
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from ._pykernels import segment_sum
from .expander import Expander, ExpanderParams
from .field import Field, FieldElement, FieldMismatchError


def bit_width(N: int) -> int:
    return max(1, (N - 1).bit_length())


def bin_bit(j: int, t: int) -> int:
    """The t-th least significant bit of j."""
    return (j >> t) & 1


@dataclass(frozen=True)
class BitLayout:
    N: int

    @property
    def lam(self) -> int:
        return bit_width(self.N)

    def bin_bit(self, j: int, t: int) -> int:
        if not 0 <= t < self.lam:
            raise IndexError(f"bit position {t} outside [0, {self.lam})")
        return bin_bit(j, t)

    def bits(self, js) -> np.ndarray:
        """``(len(js), lam)`` 0/1 matrix of binary expansions."""
        js = np.asarray(js, dtype=np.int64)
        return ((js[:, None] >> np.arange(self.lam, dtype=np.int64)) & 1).astype(np.uint8)


class SparseVector:
    """Sorted, duplicate-free (index, value) pairs with no stored zeros."""

    __slots__ = ("field", "indices", "values")

    def __init__(self, field: Field, indices=(), values=()):
        idx = np.asarray(indices, dtype=np.int64).reshape(-1)
        vals = field.canon(np.asarray(values, dtype=np.int64).reshape(-1)).astype(np.int64)
        if idx.shape != vals.shape:
            raise ValueError("indices and values differ in length")
        if idx.size and np.any(idx < 0):
            raise IndexError("negative index in sparse vector")
        order = np.argsort(idx, kind="stable")
        idx, vals = idx[order], vals[order]
        if idx.size > 1 and np.any(idx[1:] == idx[:-1]):
            raise ValueError("duplicate index in sparse vector")
        keep = vals != 0
        self.field = field
        self.indices = idx[keep]
        self.values = vals[keep]

    @classmethod
    def from_pairs(cls, field: Field, pairs):
        pairs = [(int(i), int(v)) for i, v in pairs]
        return cls(field, [i for i, _ in pairs], [v for _, v in pairs])

    @classmethod
    def from_dense(cls, field: Field, x):
        x = field.canon(np.asarray(x))
        nz = np.flatnonzero(x)
        return cls(field, nz, x[nz])

    @classmethod
    def zero(cls, field: Field):
        return cls(field)

    def __len__(self):
        return int(self.indices.size)

    @property
    def support(self) -> set:
        return set(self.indices.tolist())

    def pairs(self):
        return list(zip(self.indices.tolist(), self.values.tolist()))

    def __getitem__(self, j) -> FieldElement:
        pos = np.searchsorted(self.indices, j)
        if pos < self.indices.size and self.indices[pos] == j:
            return self.field(int(self.values[pos]))
        return self.field.zero()

    def to_dense(self, N: int) -> np.ndarray:
        if len(self) and self.indices[-1] >= N:
            raise IndexError(f"index {self.indices[-1]} does not fit length {N}")
        x = np.zeros(N, dtype=self.field.dtype)
        x[self.indices] = self.values
        return x

    def _combine(self, other: SparseVector, sign: int) -> SparseVector:
        if other.field != self.field:
            raise FieldMismatchError(f"{self.field!r} vs {other.field!r}")
        p = self.field.order
        idx = np.concatenate([self.indices, other.indices])
        vals = np.concatenate([self.values, np.mod(sign * other.values, p)])
        uniq, inv = np.unique(idx, return_inverse=True)
        sums = np.zeros(uniq.size, dtype=np.int64)
        np.add.at(sums, inv, vals)
        return SparseVector(self.field, uniq, np.mod(sums, p))

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return SparseVector(self.field, self.indices, self.field.vneg(self.values))

    def scaled(self, c: int) -> SparseVector:
        return SparseVector(self.field, self.indices, self.field.vscale(int(c), self.values))

    def __eq__(self, other):
        if not isinstance(other, SparseVector):
            return NotImplemented
        return (
            self.field == other.field
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    def __repr__(self):
        body = ", ".join(f"{i}: {v}" for i, v in self.pairs()[:8])
        more = ", ..." if len(self) > 8 else ""
        return f"SparseVector({self.field.tag}, {{{body}{more}}})"


@dataclass(eq=False)
class Syndrome:
    field: Field
    N: int
    D: int
    M: int
    lam: int
    plain: np.ndarray
    masked: np.ndarray

    def __post_init__(self):
        if self.plain.shape != (self.D, self.M):
            raise ValueError(f"plain part has shape {self.plain.shape}, expected {(self.D, self.M)}")
        if self.masked.shape != (self.D, self.M, self.lam):
            raise ValueError(
                f"masked part has shape {self.masked.shape}, expected {(self.D, self.M, self.lam)}"
            )

    @classmethod
    def zeros(cls, field: Field, params: ExpanderParams, layout: BitLayout):
        D, M, lam = params.D, params.M, layout.lam
        return cls(
            field,
            params.N,
            D,
            M,
            lam,
            np.zeros((D, M), dtype=field.dtype),
            np.zeros((D, M, lam), dtype=field.dtype),
        )

    @property
    def shape_key(self):
        return (self.field, self.N, self.D, self.M, self.lam)

    def seed_slice(self, s: int):
        """Views ``(plain block of M, masked block of M*lam)`` for seed ``s``."""
        if not 0 <= s < self.D:
            raise IndexError(f"seed {s} outside [0, {self.D})")
        return self.plain[s], self.masked[s].reshape(-1)

    def is_zero(self) -> bool:
        return not self.plain.any() and not self.masked.any()

    def _check(self, other: Syndrome):
        if other.shape_key != self.shape_key:
            raise ValueError("syndromes have different fields or dimensions")

    def __sub__(self, other: Syndrome) -> Syndrome:
        self._check(other)
        f = self.field
        return Syndrome(f, self.N, self.D, self.M, self.lam,
                        f.vsub(self.plain, other.plain), f.vsub(self.masked, other.masked))

    def __add__(self, other: Syndrome) -> Syndrome:
        self._check(other)
        f = self.field
        return Syndrome(f, self.N, self.D, self.M, self.lam,
                        f.vadd(self.plain, other.plain), f.vadd(self.masked, other.masked))

    def scaled(self, c: int) -> Syndrome:
        f = self.field
        return Syndrome(f, self.N, self.D, self.M, self.lam, f.vscale(c, self.plain), f.vscale(c, self.masked))

    def __eq__(self, other):
        if not isinstance(other, Syndrome):
            return NotImplemented
        return (
            self.shape_key == other.shape_key
            and np.array_equal(self.plain, other.plain)
            and np.array_equal(self.masked, other.masked)
        )

    __hash__ = None


def _check_layout(g: Expander, layout: BitLayout):
    if layout.N != g.N:
        raise ValueError(f"bit layout is for N={layout.N} but the expander has N={g.N}")


def sparse_products(g: Expander, layout: BitLayout, v: SparseVector, seeds=None, masked: bool = True):
    """Plain and masked products of a sparse vector for the given seeds (all by default).

    Returns int64 arrays of shape ``(len(seeds), M)`` and ``(len(seeds), M, lam)``;
    the second is None when ``masked`` is false.
    """
    _check_layout(g, layout)
    if len(v) and v.indices[-1] >= g.N:
        raise IndexError(f"index {v.indices[-1]} outside [0, {g.N})")
    seeds = np.arange(g.D) if seeds is None else np.asarray(seeds, dtype=np.int64).reshape(-1)
    M, lam, p = g.M, layout.lam, v.field.order
    nseeds = seeds.size
    if len(v) == 0:
        empty = np.zeros((nseeds, M, lam), dtype=np.int64) if masked else None
        return np.zeros((nseeds, M), dtype=np.int64), empty
    rows = g.neighbors(v.indices)[:, seeds].astype(np.int64)  # (k, nseeds)
    flat = np.arange(nseeds, dtype=np.int64)[None, :] * M + rows
    vals = np.broadcast_to(v.values[:, None], flat.shape)
    plain = segment_sum(flat.ravel(), vals.ravel(), nseeds * M, p).reshape(nseeds, M)
    if not masked:
        return plain, None
    bits = layout.bits(v.indices).astype(bool)  # (k, lam)
    mflat = flat[:, :, None] * lam + np.arange(lam, dtype=np.int64)[None, None, :]
    hit = np.broadcast_to(bits[:, None, :], mflat.shape)
    mvals = np.broadcast_to(v.values[:, None, None], mflat.shape)
    out = segment_sum(mflat[hit], mvals[hit], nseeds * M * lam, p).reshape(nseeds, M, lam)
    return plain, out


def _scatter_add(out: np.ndarray, flat_idx: np.ndarray, vals: np.ndarray, p: int):
    """out.flat[flat_idx] += vals (mod p), touching only the listed positions."""
    if flat_idx.size == 0:
        return
    flat = out.reshape(-1)
    uniq, inv = np.unique(flat_idx, return_inverse=True)
    sums = segment_sum(inv, vals, uniq.size, p)
    flat[uniq] = np.mod(flat[uniq].astype(np.int64) + sums, p).astype(out.dtype)


def syndrome_of_sparse(g: Expander, layout: BitLayout, v: SparseVector) -> Syndrome:
    """H v in O(|supp v| * D * lam) work on top of allocating the zero syndrome."""
    _check_layout(g, layout)
    if len(v) and v.indices[-1] >= g.N:
        raise IndexError(f"index {v.indices[-1]} outside [0, {g.N})")
    f = v.field
    syn = Syndrome.zeros(f, g.params, layout)
    if len(v) == 0:
        return syn
    D, M, lam = g.D, g.M, layout.lam
    rows = g.neighbors(v.indices).astype(np.int64)  # (k, D)
    flat = np.arange(D, dtype=np.int64)[None, :] * M + rows
    _scatter_add(syn.plain, flat.ravel(), np.repeat(v.values, D), f.order)
    bits = layout.bits(v.indices).astype(bool)
    mflat = flat[:, :, None] * lam + np.arange(lam, dtype=np.int64)[None, None, :]
    hit = np.broadcast_to(bits[:, None, :], mflat.shape)
    mvals = np.broadcast_to(v.values[:, None, None], mflat.shape)
    _scatter_add(syn.masked, mflat[hit], mvals[hit], f.order)
    return syn


def seed_slice(syn: Syndrome, s: int):
    return syn.seed_slice(s)


def subtract_sparse_from_syndrome(syn: Syndrome, g: Expander, layout: BitLayout, y: SparseVector) -> Syndrome:
    if y.field != syn.field:
        raise FieldMismatchError(f"{y.field!r} vs {syn.field!r}")
    return syn - syndrome_of_sparse(g, layout, y)


def dense_seed_products(g: Expander, layout: BitLayout, x: np.ndarray, s: int, field: Field, masked: bool = True):
    """W_s x and optionally (W_s (x) B) x for a dense word, via the kernels."""
    lay = g.layer(s)
    plain = kernels.dense_plain_product(lay, x, g.M, field.order)
    if not masked:
        return plain, None
    return plain, kernels.dense_masked_product(lay, x, g.M, layout.lam, field.order)


def full_syndrome_of_dense(g: Expander, layout: BitLayout, x, field: Field) -> Syndrome:
    _check_layout(g, layout)
    x = np.asarray(x)
    if x.shape != (g.N,):
        raise ValueError(f"dense word has length {x.shape}, expected {g.N}")
    x = field.canon(x).astype(np.int64)
    syn = Syndrome.zeros(field, g.params, layout)
    for s in range(g.D):
        plain, masked = dense_seed_products(g, layout, x, s, field)
        syn.plain[s] = plain
        syn.masked[s] = masked
    return syn


def rate_lower_bound(params: ExpanderParams, layout: BitLayout) -> Fraction:
    """1 - D*M*(1 + lam)/N, exact; negative values are returned as is."""
    return 1 - Fraction(params.D * params.M * (1 + layout.lam), params.N)
