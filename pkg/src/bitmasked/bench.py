"""Decode benchmarks: one CSV row per (N, K, trial) with operation counters."""
from __future__ import annotations

import csv
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bitmask import BitLayout, SparseVector, syndrome_of_sparse
from .decoder import (DET, DecodeFailed, DecodeReport, DecoderParams, ExpansionViolated,
                      decode_full, decode_syndrome)
from .expander import ExpanderParams, HashedExpander, sample_expander
from .field import Field

CSV_FIELDS = ["mode", "N", "K", "D", "M", "field", "trial", "iterations",
              "field_ops", "lookups", "wall_ns", "status"]

# above this many table entries the hashed expander is used
DENSE_TABLE_LIMIT = 1 << 26


@dataclass
class BenchConfig:
    Ns: list
    Ks: list
    trials: int
    mode: str
    field: Field
    seed: int = 0
    input_kind: str = "syndrome"
    epsilon: Fraction | None = None
    nu: Fraction = Fraction(1, 2)
    delta: Fraction = Fraction(1)
    eta: Fraction = Fraction(1, 100)
    expander: str = "auto"


def decoder_params(mode: str, K: int, epsilon=None, **kw) -> DecoderParams:
    if epsilon is not None:
        kw["epsilon"] = epsilon
    if mode == DET:
        return DecoderParams.deterministic(K, **kw)
    return DecoderParams.randomized(K, **kw)


def build_expander(N: int, K: int, epsilon, seed: int, kind: str = "auto"):
    params = ExpanderParams.with_defaults(N, K, epsilon)
    if kind == "auto":
        kind = "hashed" if params.N * params.D > DENSE_TABLE_LIMIT else "dense"
    if kind == "hashed":
        return HashedExpander(params, seed)
    return sample_expander(params, seed)


def random_error(field: Field, N: int, K: int, rng) -> SparseVector:
    idx = rng.choice(N, size=K, replace=False)
    return SparseVector(field, idx, field.random(rng, K, nonzero=True))


def _trial(cfg: BenchConfig, g, layout, dparams, N, K, trial):
    rng = np.random.default_rng(cfg.seed + trial)
    e = random_error(cfg.field, N, K, rng)
    report = DecodeReport()
    if cfg.input_kind == "syndrome":
        syn = syndrome_of_sparse(g, layout, e)
        start = time.perf_counter_ns()
        run = lambda: decode_syndrome(syn, g, layout, dparams, cfg.mode, rng, report)  # noqa: E731
    else:
        x = e.to_dense(N)
        start = time.perf_counter_ns()
        run = lambda: decode_full(x, g, layout, dparams, cfg.field, cfg.mode, rng, report)  # noqa: E731
    try:
        y = run()
        status = "ok" if y == e else "wrong"
    except DecodeFailed:
        status = "decode_failed"
    except ExpansionViolated:
        status = "expansion_violated"
    wall = time.perf_counter_ns() - start
    row = {
        "mode": cfg.mode, "N": N, "K": K, "D": g.D, "M": g.M, "field": cfg.field.tag,
        "trial": trial, "iterations": report.iterations, "field_ops": report.field_ops,
        "lookups": report.lookups, "wall_ns": wall, "status": status,
    }
    return row, report


def run_bench(cfg: BenchConfig, threads: int | None = None, with_reports: bool = False):
    """Run the grid; rows come back in (N, K, trial) order regardless of threading."""
    if threads is None:
        threads = max(1, int(os.environ.get("BITMASK_THREADS", "1")))
    out = []
    for N in cfg.Ns:
        for K in cfg.Ks:
            dparams = decoder_params(cfg.mode, K, cfg.epsilon, nu=cfg.nu, delta=cfg.delta, eta=cfg.eta)
            g = build_expander(N, K, dparams.epsilon, cfg.seed, cfg.expander)
            layout = BitLayout(N)
            jobs = range(cfg.trials)
            if threads > 1:
                with ThreadPoolExecutor(max_workers=threads) as pool:
                    results = list(pool.map(lambda t: _trial(cfg, g, layout, dparams, N, K, t), jobs))
            else:
                results = [_trial(cfg, g, layout, dparams, N, K, t) for t in jobs]
            out.extend(results if with_reports else [r for r, _ in results])
    return out


def write_csv(rows, fh):
    writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row[k] for k in CSV_FIELDS})
