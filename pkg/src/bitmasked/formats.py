"""Binary container formats.

Every file starts with one ASCII header line::

    BMX/1 <type> key=value key=value ...\\n

followed by a little-endian binary payload. GF(2) dense payloads are
bit-packed least-significant-bit first; GF(p) elements are uint64. Sparse
vectors store a uint64 count, then (uint64 index, element) pairs where a
GF(2) element takes one byte and a GF(p) element eight.
"""
from __future__ import annotations

import io
from fractions import Fraction
from pathlib import Path

import numpy as np

from .bitmask import BitLayout, SparseVector, Syndrome
from .expander import Expander, ExpanderParams, HashedExpander, LayeredExpander
from .field import Field, field_from_tag
from .group_testing import DisjunctMatrix, OutcomeVector

MAGIC = "BMX/1"


class FormatError(ValueError):
    pass


def _header(file_type: str, /, **fields) -> bytes:
    parts = [MAGIC, file_type] + [f"{k}={v}" for k, v in fields.items()]
    return (" ".join(parts) + "\n").encode("ascii")


def _split(data: bytes):
    nl = data.find(b"\n")
    if nl < 0:
        raise FormatError("missing header line")
    try:
        tokens = data[:nl].decode("ascii").split()
    except UnicodeDecodeError:
        raise FormatError("header is not ASCII") from None
    if len(tokens) < 2 or tokens[0] != MAGIC:
        raise FormatError(f"bad magic {tokens[:1]!r}, expected {MAGIC}")
    fields = {}
    for tok in tokens[2:]:
        key, sep, value = tok.partition("=")
        if not sep:
            raise FormatError(f"malformed header field {tok!r}")
        fields[key] = value
    return tokens[1], fields, data[nl + 1:]


class _Fields:
    def __init__(self, fields):
        self.fields = fields

    def get(self, key, conv=int):
        try:
            return conv(self.fields[key])
        except KeyError:
            raise FormatError(f"header lacks {key!r}") from None
        except (ValueError, ZeroDivisionError) as exc:
            raise FormatError(f"bad header value {key}={self.fields[key]!r}: {exc}") from None

    def opt(self, key, conv=int):
        return self.get(key, conv) if key in self.fields and self.fields[key] != "none" else None


def _frac(value) -> str:
    f = Fraction(value)
    return f"{f.numerator}/{f.denominator}"


def _field(text: str) -> Field:
    try:
        return field_from_tag(text)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


class _Reader:
    def __init__(self, payload: bytes):
        self.buf = memoryview(payload)
        self.pos = 0

    def take(self, nbytes: int) -> bytes:
        if self.pos + nbytes > len(self.buf):
            raise FormatError("payload truncated")
        out = self.buf[self.pos:self.pos + nbytes]
        self.pos += nbytes
        return bytes(out)

    def array(self, dtype, count):
        dt = np.dtype(dtype)
        return np.frombuffer(self.take(dt.itemsize * count), dtype=dt).copy()

    def done(self):
        if self.pos != len(self.buf):
            raise FormatError(f"{len(self.buf) - self.pos} trailing bytes after payload")


def _pack_elements(field: Field, arr: np.ndarray) -> bytes:
    flat = np.asarray(arr).reshape(-1)
    if field.order == 2:
        return np.packbits(flat.astype(np.uint8), bitorder="little").tobytes()
    return flat.astype("<u8").tobytes()


def _unpack_elements(field: Field, reader: _Reader, count: int) -> np.ndarray:
    if field.order == 2:
        bits = np.unpackbits(reader.array(np.uint8, (count + 7) // 8), bitorder="little")
        if np.any(bits[count:]):
            raise FormatError("nonzero padding bits")
        return bits[:count].astype(np.uint8)
    vals = reader.array("<u8", count)
    if np.any(vals >= field.order):
        raise FormatError("field element out of range")
    return vals.astype(np.int64)


# expanders

def encode_expander(g: Expander) -> bytes:
    pr = g.params
    head = dict(kind=g.kind, N=pr.N, D=pr.D, M=pr.M, K=pr.K, eps=_frac(pr.epsilon),
                seed=g.rng_seed if g.rng_seed is not None else "none")
    if isinstance(g, HashedExpander):
        return _header("expander", **head)
    return _header("expander", **head) + g.table.astype("<u4").tobytes()


def decode_expander(data: bytes) -> Expander:
    kind, fields, payload = _split(data)
    if kind != "expander":
        raise FormatError(f"expected an expander file, got {kind!r}")
    h = _Fields(fields)
    try:
        params = ExpanderParams(h.get("N"), h.get("D"), h.get("M"), h.get("K"), h.get("eps", Fraction))
    except ValueError as exc:
        raise FormatError(str(exc)) from None
    seed = h.opt("seed")
    variant = h.get("kind", str)
    reader = _Reader(payload)
    if variant == "hashed":
        reader.done()
        if seed is None:
            raise FormatError("hashed expander needs a seed")
        return HashedExpander(params, seed)
    if variant != "dense":
        raise FormatError(f"unknown expander kind {variant!r}")
    table = reader.array("<u4", params.N * params.D).reshape(params.N, params.D)
    reader.done()
    try:
        return LayeredExpander(params, table.astype(np.int32), rng_seed=seed)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


# syndromes

def encode_syndrome(syn: Syndrome) -> bytes:
    head = _header("syndrome", field=syn.field.tag, N=syn.N, D=syn.D, M=syn.M, **{"lambda": syn.lam})
    return head + _pack_elements(syn.field, syn.plain) + _pack_elements(syn.field, syn.masked)


def decode_syndrome_file(data: bytes) -> Syndrome:
    kind, fields, payload = _split(data)
    if kind != "syndrome":
        raise FormatError(f"expected a syndrome file, got {kind!r}")
    h = _Fields(fields)
    field = _field(h.get("field", str))
    N, D, M, lam = h.get("N"), h.get("D"), h.get("M"), h.get("lambda")
    if lam != BitLayout(N).lam:
        raise FormatError(f"lambda={lam} inconsistent with N={N}")
    reader = _Reader(payload)
    plain = _unpack_elements(field, reader, D * M).reshape(D, M).astype(field.dtype)
    masked = _unpack_elements(field, reader, D * M * lam).reshape(D, M, lam).astype(field.dtype)
    reader.done()
    return Syndrome(field, N, D, M, lam, plain, masked)


# vectors

def encode_sparse(v: SparseVector, N: int) -> bytes:
    if len(v) and v.indices[-1] >= N:
        raise ValueError("sparse vector does not fit the declared length")
    out = io.BytesIO()
    out.write(_header("sparse", field=v.field.tag, N=N))
    out.write(np.uint64(len(v)).astype("<u8").tobytes())
    vdt = np.dtype("u1") if v.field.order == 2 else np.dtype("<u8")
    rec = np.zeros(len(v), dtype=[("index", "<u8"), ("value", vdt)])
    rec["index"] = v.indices
    rec["value"] = v.values
    out.write(rec.tobytes())
    return out.getvalue()


def decode_sparse(data: bytes):
    """Returns ``(SparseVector, N)``."""
    kind, fields, payload = _split(data)
    if kind != "sparse":
        raise FormatError(f"expected a sparse vector file, got {kind!r}")
    h = _Fields(fields)
    field = _field(h.get("field", str))
    N = h.get("N")
    reader = _Reader(payload)
    count = int(reader.array("<u8", 1)[0])
    vdt = np.dtype("u1") if field.order == 2 else np.dtype("<u8")
    rec_dt = np.dtype([("index", "<u8"), ("value", vdt)])
    rec = np.frombuffer(reader.take(rec_dt.itemsize * count), dtype=rec_dt)
    reader.done()
    idx = rec["index"].astype(np.int64)
    vals = rec["value"].astype(np.int64)
    if count and (np.any(idx >= N) or np.any(np.diff(idx) <= 0)):
        raise FormatError("indices must be strictly increasing and below N")
    if np.any(vals == 0) or np.any(vals >= field.order):
        raise FormatError("stored values must be nonzero field elements")
    return SparseVector(field, idx, vals), N


def encode_dense(field: Field, x) -> bytes:
    x = field.canon(np.asarray(x))
    return _header("dense", field=field.tag, N=x.size) + _pack_elements(field, x)


def decode_dense(data: bytes):
    """Returns ``(field, array)``."""
    kind, fields, payload = _split(data)
    if kind != "dense":
        raise FormatError(f"expected a dense vector file, got {kind!r}")
    h = _Fields(fields)
    field = _field(h.get("field", str))
    N = h.get("N")
    reader = _Reader(payload)
    x = _unpack_elements(field, reader, N)
    reader.done()
    return field, x


def decode_vector(data: bytes, N: int | None = None):
    """Read either vector format; returns ``(field, SparseVector, N)``."""
    kind, _, _ = _split(data)
    if kind == "sparse":
        v, n = decode_sparse(data)
        field = v.field
    elif kind == "dense":
        field, x = decode_dense(data)
        v, n = SparseVector.from_dense(field, x), x.size
    else:
        raise FormatError(f"expected a vector file, got {kind!r}")
    if N is not None and n != N:
        raise FormatError(f"vector length {n} does not match N={N}")
    return field, v, n


# group testing

def encode_disjunct(W: DisjunctMatrix) -> bytes:
    head = _header("disjunct", N=W.N, K=W.K if W.K is not None else "none", T=W.T,
                   seed=W.rng_seed if W.rng_seed is not None else "none",
                   p=_frac(W.p) if W.p is not None else "none")
    out = io.BytesIO()
    out.write(head)
    for q in range(W.T):
        row = W.row(q)
        out.write(np.uint32(row.size).astype("<u4").tobytes())
        out.write(row.astype("<u4").tobytes())
    return out.getvalue()


def decode_disjunct(data: bytes) -> DisjunctMatrix:
    kind, fields, payload = _split(data)
    if kind != "disjunct":
        raise FormatError(f"expected a disjunct matrix file, got {kind!r}")
    h = _Fields(fields)
    N, T = h.get("N"), h.get("T")
    reader = _Reader(payload)
    mat = np.zeros((T, N), dtype=bool)
    for q in range(T):
        count = int(reader.array("<u4", 1)[0])
        row = reader.array("<u4", count).astype(np.int64)
        if count and (row.max() >= N or np.any(np.diff(row) <= 0)):
            raise FormatError(f"row {q} has unsorted or out-of-range items")
        mat[q, row] = True
    reader.done()
    return DisjunctMatrix.from_dense(mat, K=h.opt("K"), rng_seed=h.opt("seed"), p=h.opt("p", Fraction))


def encode_outcomes(out: OutcomeVector) -> bytes:
    head = _header("outcomes", T=out.y1.size, **{"lambda": out.lam})
    return (head + np.packbits(out.y1, bitorder="little").tobytes()
            + np.packbits(out.y2.reshape(-1), bitorder="little").tobytes())


def decode_outcomes(data: bytes) -> OutcomeVector:
    kind, fields, payload = _split(data)
    if kind != "outcomes":
        raise FormatError(f"expected an outcomes file, got {kind!r}")
    h = _Fields(fields)
    T, lam = h.get("T"), h.get("lambda")
    reader = _Reader(payload)
    bit_field = field_from_tag("gf2")
    y1 = _unpack_elements(bit_field, reader, T)
    y2 = _unpack_elements(bit_field, reader, T * lam).reshape(T, lam)
    reader.done()
    try:
        return OutcomeVector(y1, y2)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def file_kind(path) -> str:
    with open(path, "rb") as fh:
        line = fh.readline(4096)
    kind, _, _ = _split(line if line.endswith(b"\n") else line + b"\n")
    return kind


def read_bytes(path) -> bytes:
    return Path(path).read_bytes()


def write_bytes(path, data: bytes):
    Path(path).write_bytes(data)
