"""Sublinear syndrome decoding and full decoding of bitmasked expander codes.

Each iteration estimates the residual error weight from the plain blocks,
picks a seed whose plain block is nearly as heavy as the estimate, reads
error positions off that seed's masked block, and folds them into the
running estimate ``y``. Residual blocks ``H_s (e - y)`` are formed on demand
as ``source_s - H_s y``, so a syndrome decode never touches more than the
blocks it looks at.

Operation counts are accumulated in a ``DecodeReport`` under a fixed cost
model (see ``DecodeReport``), independent of which kernel backend ran.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np

from . import kernels
from .bitmask import BitLayout, SparseVector, Syndrome, dense_seed_products, sparse_products
from .expander import Expander, as_fraction
from .field import Field

DET = "det"
RAND = "rand"


class DecodeFailed(RuntimeError):
    def __init__(self, residual_weight: int, iterations: int):
        super().__init__(
            f"residual still has estimated weight {residual_weight} after {iterations} iterations"
        )
        self.residual_weight = residual_weight
        self.iterations = iterations


class ExpansionViolated(RuntimeError):
    """No seed met the GoodSeed threshold: the graph does not expand enough for these params."""


class InfeasibleParams(ValueError):
    pass


@dataclass(frozen=True)
class DecoderParams:
    K: int
    nu: Fraction = Fraction(1, 2)
    epsilon: Fraction = Fraction(1, 20)
    delta: Fraction = Fraction(1)
    eta: Fraction = Fraction(1, 100)
    goodseed_attempt_cap: int | None = None

    def __post_init__(self):
        for name in ("nu", "epsilon", "delta", "eta"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        if self.K < 1:
            raise ValueError(f"K must be at least 1, got {self.K}")
        if not 0 < self.nu < 1:
            raise ValueError(f"nu must lie in (0, 1), got {self.nu}")
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.delta <= 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if not 0 < self.eta < 1:
            raise ValueError(f"eta must lie in (0, 1), got {self.eta}")
        if self.goodseed_attempt_cap is None:
            cap = math.ceil(64 * (1 + 1 / self.delta))
            object.__setattr__(self, "goodseed_attempt_cap", cap)
        elif self.goodseed_attempt_cap < 1:
            raise ValueError("goodseed_attempt_cap must be positive")

    @classmethod
    def deterministic(cls, K: int, **kw):
        kw.setdefault("epsilon", Fraction(1, 20))
        return cls(K=K, **kw)

    @classmethod
    def randomized(cls, K: int, **kw):
        kw.setdefault("epsilon", Fraction(1, 40))
        return cls(K=K, **kw)

    @property
    def max_iters(self) -> int:
        if self.K == 1:
            return 1
        return math.ceil(1 + math.log2(self.K) / math.log2(1 / self.nu) - 1e-12)

    @property
    def sample_count(self) -> int:
        """r = 1 + (log(1/eta) + log log K - log log(1/nu)) / log(1 + delta), rounded up."""
        loglog_k = math.log2(max(math.log2(self.K), 1.0))
        loglog_nu = math.log2(math.log2(1 / self.nu))
        r = 1 + (math.log2(1 / self.eta) + loglog_k - loglog_nu) / math.log2(1 + self.delta)
        return max(1, math.ceil(r - 1e-12))

    def shrink(self, mode: str) -> Fraction:
        """The factor 1 - 2(1+delta)eps (rand) or 1 - 2eps (det)."""
        if mode == DET:
            return 1 - 2 * self.epsilon
        return 1 - 2 * (1 + self.delta) * self.epsilon

    def feasible(self, mode: str) -> bool:
        c = self.shrink(mode)
        return c > 0 and c * c >= 1 - Fraction(2, 5) * self.nu

    def threshold(self, mode: str) -> Fraction:
        """GoodSeed accepts seed s when ||W_s x||_0 >= threshold * L."""
        return (1 - Fraction(2, 5) * self.nu) / self.shrink(mode)

    def check(self, mode: str):
        if mode not in (DET, RAND):
            raise ValueError(f"mode must be 'det' or 'rand', got {mode!r}")
        if not self.feasible(mode):
            raise InfeasibleParams(
                f"nu={self.nu}, epsilon={self.epsilon}, delta={self.delta} violate the {mode} "
                "feasibility condition"
            )


@dataclass
class DecodeReport:
    """Counters and trace of one decode.

    Cost model: ``lookups`` counts reads of the expander table and of the
    bit table; ``field_ops`` counts field additions, subtractions and
    comparisons (zero tests included). A syndrome block is read in place,
    so only its zero tests are charged. Dense products of a length-N word
    cost N lookups and N field ops (plain) or N(1 + lam) lookups and N*lam
    field ops (masked).
    """

    keep_iterates: bool = False
    iterations: int = 0
    estimates: list = dc_field(default_factory=list)
    seeds: list = dc_field(default_factory=list)
    seeds_tried: int = 0
    field_ops: int = 0
    lookups: int = 0
    phase_ops: Counter = dc_field(default_factory=Counter)
    iteration_ops: list = dc_field(default_factory=list)
    out_of_range: int = 0
    duplicates: int = 0
    filtered: int = 0
    iterates: list = dc_field(default_factory=list)

    def charge(self, phase: str, field_ops: int = 0, lookups: int = 0):
        self.field_ops += field_ops
        self.lookups += lookups
        self.phase_ops[phase] += field_ops + lookups

    @property
    def total_ops(self) -> int:
        return self.field_ops + self.lookups

    def as_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "estimates": list(self.estimates),
            "seeds": list(self.seeds),
            "seeds_tried": self.seeds_tried,
            "field_ops": self.field_ops,
            "lookups": self.lookups,
            "phase_ops": dict(self.phase_ops),
            "iteration_ops": [dict(c) for c in self.iteration_ops],
            "out_of_range": self.out_of_range,
            "duplicates": self.duplicates,
            "filtered": self.filtered,
        }


def _rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


# single-syndrome building blocks

def _meets(norm: int, L: int, threshold: Fraction) -> bool:
    return norm * threshold.denominator >= threshold.numerator * L


def estimate_det(syn: Syndrome) -> int:
    """max over seeds of the number of nonzero entries in the plain block."""
    return int(np.count_nonzero(syn.plain, axis=1).max(initial=0))


def estimate_rand(syn: Syndrome, r: int, rng) -> int:
    if r < 1:
        raise ValueError("r must be at least 1")
    seeds = _rng(rng).integers(0, syn.D, size=r)
    return int(np.count_nonzero(syn.plain[seeds], axis=1).max())


def good_seed_det(syn: Syndrome, L: int, params: DecoderParams) -> int:
    if L < 1:
        raise ValueError("L must be at least 1")
    thr = params.threshold(DET)
    for s, norm in enumerate(np.count_nonzero(syn.plain, axis=1).tolist()):
        if _meets(norm, L, thr):
            return s
    raise ExpansionViolated(f"no seed has a plain block of weight >= {float(thr * L):.3f}")


def good_seed_rand(syn: Syndrome, L: int, params: DecoderParams, rng) -> int:
    if L < 1:
        raise ValueError("L must be at least 1")
    rng = _rng(rng)
    thr = params.threshold(RAND)
    for _ in range(params.goodseed_attempt_cap):
        s = int(rng.integers(0, syn.D))
        if _meets(int(np.count_nonzero(syn.plain[s])), L, thr):
            return s
    raise ExpansionViolated(
        f"{params.goodseed_attempt_cap} sampled seeds all fell below {float(thr * L):.3f}"
    )


def approximate(plain, masked, layout: BitLayout, field: Field, report: DecodeReport | None = None) -> SparseVector:
    """Read candidate error positions off one seed's plain and masked blocks.

    A row q with plain value a != 0 yields the index whose bit t is set iff
    masked(q, t) != 0; over GF(p) the row is kept only if every nonzero
    masked entry equals a. Indices >= N and repeated indices (first row wins)
    are dropped and counted.
    """
    plain = np.asarray(plain, dtype=np.int64)
    masked = np.asarray(masked, dtype=np.int64).reshape(plain.size, layout.lam)
    idx, vals, n_out, n_dup, n_filt = kernels.approximate_block(plain, masked, layout.N, field.order == 2)
    if report is not None:
        report.out_of_range += n_out
        report.duplicates += n_dup
        report.filtered += n_filt
        nz = int(np.count_nonzero(plain))
        report.charge("approximate", field_ops=plain.size + nz * layout.lam)
    return SparseVector(field, idx, vals)


# iterative decoder

class _SyndromeSource:
    def __init__(self, syn: Syndrome):
        self.syn = syn

    def plain(self, seeds, report):
        return self.syn.plain[seeds].astype(np.int64)

    def masked(self, s, report):
        return self.syn.masked[s].astype(np.int64)


class _WordSource:
    """Per-seed products of a dense word, computed on first use and cached."""

    def __init__(self, g: Expander, layout: BitLayout, x: np.ndarray, field: Field):
        self.g, self.layout, self.x, self.field = g, layout, x, field
        self._plain = {}
        self._masked = {}

    def plain(self, seeds, report):
        N = self.g.N
        rows = []
        for s in np.asarray(seeds).tolist():
            blk = self._plain.get(s)
            if blk is None:
                blk, _ = dense_seed_products(self.g, self.layout, self.x, s, self.field, masked=False)
                self._plain[s] = blk
                report.charge("plain_product", field_ops=N, lookups=N)
            rows.append(blk)
        return np.array(rows, dtype=np.int64).reshape(len(rows), self.g.M)

    def masked(self, s, report):
        blk = self._masked.get(s)
        if blk is None:
            N, lam = self.g.N, self.layout.lam
            blk = kernels.dense_masked_product(self.g.layer(s), self.x, self.g.M, lam, self.field.order)
            self._masked[s] = blk
            report.charge("masked_product", field_ops=N * lam, lookups=N * (1 + lam))
        return blk


class _Decoder:
    def __init__(self, source, g: Expander, layout: BitLayout, field: Field,
                 params: DecoderParams, mode: str, rng, report: DecodeReport):
        params.check(mode)
        if layout.N != g.N:
            raise ValueError("bit layout and expander disagree on N")
        self.source, self.g, self.layout, self.field = source, g, layout, field
        self.params, self.mode, self.report = params, mode, report
        self.rng = _rng(rng) if mode == RAND else None
        self.y = SparseVector.zero(field)
        self._norms = {}
        self._blocks = {}

    def _residual_plain(self, seeds, phase):
        """Residual plain blocks for the seeds not yet computed this iteration."""
        missing = [s for s in dict.fromkeys(np.asarray(seeds).tolist()) if s not in self._norms]
        if not missing:
            return
        rep = self.report
        blocks = self.source.plain(missing, rep)
        k = len(self.y)
        if k:
            corr, _ = sparse_products(self.g, self.layout, self.y, missing, masked=False)
            blocks = np.mod(blocks - corr, self.field.order)
        norms = np.count_nonzero(blocks, axis=1)
        rep.charge(phase, field_ops=len(missing) * (self.g.M + k), lookups=len(missing) * k)
        for s, blk, n in zip(missing, blocks, norms.tolist()):
            self._blocks[s] = blk
            self._norms[s] = n

    def _residual_masked(self, s):
        blk = self.source.masked(s, self.report)
        k = len(self.y)
        if k:
            _, corr = sparse_products(self.g, self.layout, self.y, [s])
            blk = np.mod(blk - corr[0], self.field.order)
            lam = self.layout.lam
            self.report.charge("residual", field_ops=k * lam, lookups=k * (1 + lam))
        return blk

    def estimate(self) -> int:
        if self.mode == DET:
            seeds = np.arange(self.g.D)
        else:
            seeds = self.rng.integers(0, self.g.D, size=self.params.sample_count)
        self._residual_plain(seeds, "estimate")
        return max(self._norms[s] for s in np.asarray(seeds).tolist())

    def good_seed(self, L: int) -> int:
        rep = self.report
        thr = self.params.threshold(self.mode)
        if self.mode == DET:
            for s in range(self.g.D):
                rep.seeds_tried += 1
                rep.charge("goodseed", field_ops=1)
                if _meets(self._norms[s], L, thr):
                    return s
            raise ExpansionViolated(f"no seed has a plain block of weight >= {float(thr * L):.3f}")
        for _ in range(self.params.goodseed_attempt_cap):
            s = int(self.rng.integers(0, self.g.D))
            rep.seeds_tried += 1
            self._residual_plain([s], "goodseed")
            rep.charge("goodseed", field_ops=1)
            if _meets(self._norms[s], L, thr):
                return s
        raise ExpansionViolated(
            f"{self.params.goodseed_attempt_cap} sampled seeds all fell below {float(thr * L):.3f}"
        )

    def run(self) -> SparseVector:
        rep = self.report
        max_iters = self.params.max_iters
        while True:
            before = Counter(rep.phase_ops)
            self._norms.clear()
            self._blocks.clear()
            L = self.estimate()
            rep.estimates.append(L)
            if L == 0:
                rep.iteration_ops.append(Counter(rep.phase_ops) - before)
                return self.y
            if rep.iterations >= max_iters:
                rep.iteration_ops.append(Counter(rep.phase_ops) - before)
                raise DecodeFailed(L, rep.iterations)
            s = self.good_seed(L)
            rep.seeds.append(s)
            plain = self._blocks[s]
            masked = self._residual_masked(s)
            y_it = approximate(plain, masked, self.layout, self.field, rep)
            if rep.keep_iterates:
                rep.iterates.append(y_it)
            self.y = self.y + y_it
            rep.charge("accumulate", field_ops=len(y_it))
            rep.iterations += 1
            rep.iteration_ops.append(Counter(rep.phase_ops) - before)


def decode_syndrome(syn: Syndrome, g: Expander, layout: BitLayout, params: DecoderParams,
                    mode: str = DET, rng=None, report: DecodeReport | None = None) -> SparseVector:
    """Recover a K-sparse error e from its syndrome H e."""
    if (syn.N, syn.D, syn.M, syn.lam) != (g.N, g.D, g.M, layout.lam):
        raise ValueError("syndrome dimensions do not match the expander and bit layout")
    report = DecodeReport() if report is None else report
    return _Decoder(_SyndromeSource(syn), g, layout, syn.field, params, mode, rng, report).run()


def decode_full(x, g: Expander, layout: BitLayout, params: DecoderParams, field: Field,
                mode: str = DET, rng=None, report: DecodeReport | None = None) -> SparseVector:
    """Recover e from the received word x = c + e, computing syndrome blocks from x as needed."""
    x = np.asarray(x)
    if x.shape != (g.N,):
        raise ValueError(f"word has shape {x.shape}, expected ({g.N},)")
    x = field.canon(x).astype(np.int64)
    report = DecodeReport() if report is None else report
    return _Decoder(_WordSource(g, layout, x, field), g, layout, field, params, mode, rng, report).run()
