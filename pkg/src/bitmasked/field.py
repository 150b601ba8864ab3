"""Finite fields used by the codes: GF(2) and prime fields GF(p).

Elements are handled in two ways. ``FieldElement`` wraps a single value
together with its field and supports the usual operators; it is what the
public API hands out for scalars. Bulk data (syndromes, dense words) lives
in numpy arrays of canonical representatives, and the ``Field`` object
provides the vectorised helpers that operate on them.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

MAX_PRIME = 1 << 61


class FieldMismatchError(TypeError):
    """Raised when elements from two different fields are combined."""


class Field:
    """Base class for the supported prime-order fields."""

    order: int
    tag: str
    dtype: np.dtype

    def __eq__(self, other):
        return isinstance(other, Field) and self.order == other.order

    def __hash__(self):
        return hash(("Field", self.order))

    def __repr__(self):
        return f"{type(self).__name__}({self.order})" if self.order != 2 else "GF2()"

    @property
    def element_bytes(self) -> int:
        """Width of one element in the binary file formats."""
        return 1 if self.order == 2 else 8

    # scalar arithmetic on canonical ints

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.order

    def neg(self, a: int) -> int:
        return (-a) % self.order

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.order

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.order

    def inv(self, a: int) -> int:
        a %= self.order
        if a == 0:
            raise ZeroDivisionError(f"0 has no inverse in {self!r}")
        return pow(a, -1, self.order)

    def __call__(self, value: int) -> FieldElement:
        return FieldElement(self, int(value) % self.order)

    def zero(self) -> FieldElement:
        return FieldElement(self, 0)

    def one(self) -> FieldElement:
        return FieldElement(self, 1)

    # vectorised helpers

    def canon(self, arr) -> np.ndarray:
        """Reduce an integer array to canonical representatives."""
        arr = np.asarray(arr)
        if arr.dtype == object:
            return np.array([int(v) % self.order for v in arr.ravel()], dtype=np.int64).reshape(arr.shape)
        return np.mod(arr.astype(np.int64, copy=False), self.order).astype(self.dtype, copy=False)

    def vadd(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.mod(a.astype(np.int64) + b, self.order).astype(self.dtype)

    def vsub(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.mod(a.astype(np.int64) - b, self.order).astype(self.dtype)

    def vneg(self, a: np.ndarray) -> np.ndarray:
        return np.mod(-a.astype(np.int64), self.order).astype(self.dtype)

    def vscale(self, c: int, a: np.ndarray) -> np.ndarray:
        c %= self.order
        if self.order < (1 << 31):
            return np.mod(a.astype(np.int64) * c, self.order).astype(self.dtype)
        prod = a.astype(object) * c % self.order
        return np.asarray(prod, dtype=np.int64).reshape(a.shape)

    def random(self, rng: np.random.Generator, size=None, nonzero: bool = False):
        low = 1 if nonzero else 0
        return rng.integers(low, self.order, size=size, dtype=np.int64)


class GF2(Field):
    order = 2
    tag = "gf2"
    dtype = np.dtype(np.uint8)

    def vadd(self, a, b):
        return np.bitwise_xor(a.astype(np.uint8), np.asarray(b, dtype=np.uint8))

    vsub = vadd

    def vneg(self, a):
        return a.astype(np.uint8, copy=True)

    def vscale(self, c, a):
        return a.astype(np.uint8) if c % 2 else np.zeros_like(a, dtype=np.uint8)


class PrimeField(Field):
    """GF(p) for an odd prime ``p < 2**61``."""

    dtype = np.dtype(np.int64)

    def __init__(self, p: int):
        p = int(p)
        if p == 2:
            raise ValueError("use GF2() for the binary field")
        if not 2 < p < MAX_PRIME or not _is_prime(p):
            raise ValueError(f"modulus must be an odd prime below 2**61, got {p}")
        self.order = p
        self.tag = f"gfp:{p}"


@functools.lru_cache(maxsize=None)
def _is_prime(p: int) -> bool:
    from sympy import isprime

    return bool(isprime(p))


def field_from_tag(tag: str) -> Field:
    """Parse ``gf2`` or ``gfp:<p>``."""
    tag = tag.strip().lower()
    if tag == "gf2":
        return GF2()
    if tag.startswith("gfp:"):
        try:
            p = int(tag[4:])
        except ValueError:
            raise ValueError(f"bad field tag {tag!r}") from None
        return GF2() if p == 2 else PrimeField(p)
    raise ValueError(f"unknown field tag {tag!r} (expected gf2 or gfp:<p>)")


@dataclass(frozen=True)
class FieldElement:
    field: Field
    value: int

    def _check(self, other) -> FieldElement:
        if isinstance(other, int):
            return self.field(other)
        if not isinstance(other, FieldElement):
            return NotImplemented
        if other.field != self.field:
            raise FieldMismatchError(f"cannot combine {self.field!r} with {other.field!r}")
        return other

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return FieldElement(self.field, self.field.add(self.value, other.value))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return FieldElement(self.field, self.field.sub(self.value, other.value))

    def __rsub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return FieldElement(self.field, self.field.mul(self.value, other.value))

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement(self.field, self.field.neg(self.value))

    def inverse(self) -> FieldElement:
        return FieldElement(self.field, self.field.inv(self.value))

    def __truediv__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __bool__(self):
        return self.value != 0

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"{self.value} (mod {self.field.order})"


def field_add(a: FieldElement, b: FieldElement) -> FieldElement:
    return a + b


def field_neg(a: FieldElement) -> FieldElement:
    return -a


def field_mul(a: FieldElement, b: FieldElement) -> FieldElement:
    return a * b


def field_inv(a: FieldElement) -> FieldElement:
    return a.inverse()
