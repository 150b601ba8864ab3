"""Command-line interface.

Exit codes: 0 success, 2 invalid arguments, 3 decoding failed,
4 expansion violated, 5 malformed input file.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import formats, kernels
from .bench import BenchConfig, decoder_params, random_error, run_bench, write_csv
from .bitmask import BitLayout, full_syndrome_of_dense, syndrome_of_sparse
from .decoder import DecodeFailed, DecodeReport, ExpansionViolated, decode_full, decode_syndrome
from .expander import ExpanderParams, HashedExpander, sample_expander
from .field import field_from_tag
from .formats import FormatError
from .group_testing import default_test_count, outcomes, recover, sample_disjunct

EXIT_OK, EXIT_USAGE, EXIT_DECODE, EXIT_EXPANSION, EXIT_FORMAT = 0, 2, 3, 4, 5


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _int_list(text: str) -> list:
    if not text.strip():
        return []
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _field(text: str):
    try:
        return field_from_tag(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _jsonable(value):
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, Path):
        return str(value)
    if hasattr(value, "tag"):
        return value.tag
    return value


def _write_manifest(args, argv, timings: dict, outputs: list):
    """Record the run next to its first output file."""
    if not outputs:
        return
    params = {k: _jsonable(v) for k, v in vars(args).items() if k not in ("func", "argv")}
    manifest = {
        "subcommand": args.command if args.command != "gt" else f"gt {args.gt_command}",
        "argv": argv,
        "params": params,
        "outputs": [str(p) for p in outputs],
        "backend": kernels.BACKEND,
        "timings_ns": timings,
    }
    Path(str(outputs[0]) + ".manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


# subcommands

def cmd_gen_expander(args):
    params = ExpanderParams.with_defaults(args.n, args.k, args.epsilon, D=args.d, M=args.m)
    t0 = time.perf_counter_ns()
    g = HashedExpander(params, args.seed) if args.hashed else sample_expander(params, args.seed)
    formats.write_bytes(args.output, formats.encode_expander(g))
    print(f"expander N={params.N} D={params.D} M={params.M} K={params.K} eps={params.epsilon} -> {args.output}")
    return {"sample": time.perf_counter_ns() - t0}, [args.output]


def cmd_gen_error(args):
    field = args.field
    rng = np.random.default_rng(args.seed)
    if not 0 <= args.k <= args.n:
        raise ValueError("need 0 <= k <= n")
    e = random_error(field, args.n, args.k, rng)
    data = formats.encode_dense(field, e.to_dense(args.n)) if args.dense else formats.encode_sparse(e, args.n)
    formats.write_bytes(args.output, data)
    print(f"{len(e)}-sparse vector over {field.tag} -> {args.output}")
    return {}, [args.output]


def cmd_syndrome(args):
    g = formats.decode_expander(formats.read_bytes(args.expander))
    layout = BitLayout(g.N)
    data = formats.read_bytes(args.vector)
    dense = formats.file_kind(args.vector) == "dense"
    t0 = time.perf_counter_ns()
    if dense:
        field, x = formats.decode_dense(data)
        n = x.size
    else:
        field, v, n = formats.decode_vector(data)
    if n != g.N:
        raise ValueError(f"vector length {n} does not match N={g.N}")
    if dense:
        syn = full_syndrome_of_dense(g, layout, x, field)
    else:
        syn = syndrome_of_sparse(g, layout, v)
    elapsed = time.perf_counter_ns() - t0
    formats.write_bytes(args.output, formats.encode_syndrome(syn))
    print(f"syndrome over {field.tag} ({syn.D}x{syn.M} plain, lambda={syn.lam}) -> {args.output}")
    return {"syndrome": elapsed}, [args.output]


def cmd_decode(args):
    g = formats.decode_expander(formats.read_bytes(args.expander))
    layout = BitLayout(g.N)
    data = formats.read_bytes(args.input_file)
    K = args.k if args.k is not None else g.params.K
    dparams = decoder_params(args.mode, K, args.epsilon, nu=args.nu, delta=args.delta, eta=args.eta)
    report = DecodeReport()
    rng = np.random.default_rng(args.seed)
    t0 = time.perf_counter_ns()
    try:
        if args.input == "syndrome":
            syn = formats.decode_syndrome_file(data)
            field = syn.field
            y = decode_syndrome(syn, g, layout, dparams, args.mode, rng, report)
        else:
            field, x = formats.decode_dense(data)
            if x.size != g.N:
                raise ValueError(f"word length {x.size} does not match N={g.N}")
            y = decode_full(x, g, layout, dparams, field, args.mode, rng, report)
    finally:
        elapsed = time.perf_counter_ns() - t0
        summary = dict(report.as_dict(), mode=args.mode, wall_ns=elapsed)
        if args.report:
            Path(args.report).write_text(json.dumps(summary, indent=2) + "\n")
    formats.write_bytes(args.output, formats.encode_sparse(y, g.N))
    print(f"recovered {len(y)} errors in {report.iterations} iterations "
          f"({report.seeds_tried} seeds tried, {report.field_ops} field ops) -> {args.output}")
    outputs = [args.output] + ([args.report] if args.report else [])
    return {"decode": elapsed}, outputs


def cmd_bench(args):
    cfg = BenchConfig(Ns=args.n, Ks=args.k, trials=args.trials, mode=args.mode, field=args.field,
                      seed=args.seed, input_kind=args.input, epsilon=args.epsilon, nu=args.nu,
                      delta=args.delta, eta=args.eta, expander=args.expander)
    t0 = time.perf_counter_ns()
    rows = run_bench(cfg)
    elapsed = time.perf_counter_ns() - t0
    if args.output:
        with open(args.output, "w", newline="") as fh:
            write_csv(rows, fh)
    else:
        write_csv(rows, sys.stdout)
    return {"bench": elapsed}, [args.output] if args.output else []


def cmd_bench_kernels(args):
    from . import kernel_bench

    rows = kernel_bench.run(N=args.n, M=args.m, p=args.field.order, repeat=args.repeat)
    print(f"backends available: {', '.join(kernels.BACKENDS)} (active: {kernels.BACKEND})")
    print(kernel_bench.format_rows(rows))
    return {}, []


def cmd_gt_gen(args):
    if args.k < 1:
        raise ValueError("K must be at least 1")
    T = args.t if args.t is not None else default_test_count(args.n, args.k)
    W = sample_disjunct(args.n, args.k, T, args.seed)
    formats.write_bytes(args.output, formats.encode_disjunct(W))
    print(f"disjunct matrix {W.T}x{W.N} (p=1/{args.k + 1}, {W.T * (1 + BitLayout(args.n).lam)} tests) -> {args.output}")
    return {}, [args.output]


def _read_items(args):
    items = list(args.defectives or [])
    if args.defectives_file:
        text = Path(args.defectives_file).read_text().replace(",", " ").split()
        items += [int(tok) for tok in text]
    return items


def cmd_gt_outcomes(args):
    W = formats.decode_disjunct(formats.read_bytes(args.matrix))
    out = outcomes(W, BitLayout(W.N), _read_items(args))
    formats.write_bytes(args.output, formats.encode_outcomes(out))
    print(f"{int(out.y1.sum())} positive pools of {W.T} -> {args.output}")
    return {}, [args.output]


def cmd_gt_recover(args):
    W = formats.decode_disjunct(formats.read_bytes(args.matrix))
    out = formats.decode_outcomes(formats.read_bytes(args.outcomes))
    layout = BitLayout(W.N)
    if out.y1.size != W.T or out.lam != layout.lam:
        raise ValueError("outcome dimensions do not match the matrix")
    stats = {}
    t0 = time.perf_counter_ns()
    found = sorted(recover(out, W, layout, stats))
    elapsed = time.perf_counter_ns() - t0
    text = " ".join(map(str, found))
    if args.output:
        Path(args.output).write_text(text + "\n")
    print(text)
    return {"recover": elapsed}, [args.output] if args.output else []


def cmd_replay(args):
    manifest = json.loads(Path(args.manifest).read_text())
    argv = manifest["argv"]
    return main(argv, _record=False)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bitmasked", description="Bitmasked expander codes and group testing.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen-expander", help="sample a layered expander")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--epsilon", type=_fraction, required=True)
    s.add_argument("--d", type=int, help="layers (default ceil(2 log2 N / eps))")
    s.add_argument("--m", type=int, help="rows per layer (default ceil(4K / eps))")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--hashed", action="store_true", help="store a hashed implicit table instead of the full table")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_gen_expander)

    s = sub.add_parser("gen-error", help="write a random sparse vector")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--field", type=_field, default=field_from_tag("gf2"))
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--dense", action="store_true", help="write the dense format")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_gen_error)

    s = sub.add_parser("syndrome", help="compute the syndrome of a vector")
    s.add_argument("--expander", required=True)
    s.add_argument("--vector", required=True)
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_syndrome)

    def decoder_flags(s):
        s.add_argument("--mode", choices=["det", "rand"], default="det")
        s.add_argument("--epsilon", type=_fraction, help="decoder epsilon (default 1/20 det, 1/40 rand)")
        s.add_argument("--nu", type=_fraction, default=Fraction(1, 2))
        s.add_argument("--delta", type=_fraction, default=Fraction(1))
        s.add_argument("--eta", type=_fraction, default=Fraction(1, 100))
        s.add_argument("--seed", type=int, default=0)

    s = sub.add_parser("decode", help="recover the error vector")
    s.add_argument("--expander", required=True)
    s.add_argument("--input", choices=["syndrome", "word"], default="syndrome")
    s.add_argument("--in", dest="input_file", required=True)
    s.add_argument("--k", type=int, help="error bound (default: the expander's K)")
    decoder_flags(s)
    s.add_argument("--report", help="write a JSON report here")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_decode)

    s = sub.add_parser("bench", help="decode benchmark over a grid of (N, K)")
    s.add_argument("--n", type=_int_list, required=True, help="comma-separated block lengths")
    s.add_argument("--k", type=_int_list, required=True, help="comma-separated sparsities")
    s.add_argument("--trials", type=int, default=10)
    s.add_argument("--input", choices=["syndrome", "word"], default="syndrome")
    s.add_argument("--field", type=_field, default=field_from_tag("gf2"))
    s.add_argument("--expander", choices=["auto", "dense", "hashed"], default="auto")
    decoder_flags(s)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("bench-kernels", help="time the compiled and numpy kernels")
    s.add_argument("--n", type=int, default=1 << 16)
    s.add_argument("--m", type=int, default=1280)
    s.add_argument("--field", type=_field, default=field_from_tag("gf2"))
    s.add_argument("--repeat", type=int, default=5)
    s.set_defaults(func=cmd_bench_kernels)

    gt = sub.add_parser("gt", help="group testing")
    gsub = gt.add_subparsers(dest="gt_command", required=True)
    s = gsub.add_parser("gen", help="sample a disjunct pool matrix")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--t", type=int, help="pools (default ceil(3 (K+1)^2 ln N))")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_gt_gen)

    s = gsub.add_parser("outcomes", help="compute test outcomes for a defective set")
    s.add_argument("--matrix", required=True)
    s.add_argument("--defectives", type=_int_list, default=[])
    s.add_argument("--defectives-file")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_gt_outcomes)

    s = gsub.add_parser("recover", help="recover the defective set from outcomes")
    s.add_argument("--matrix", required=True)
    s.add_argument("--outcomes", required=True)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_gt_recover)

    s = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    s.add_argument("manifest")
    s.set_defaults(func=cmd_replay)
    return p


def main(argv=None, _record: bool = True) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result = args.func(args)
    except FormatError as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except DecodeFailed as exc:
        print(f"decoding failed: {exc}", file=sys.stderr)
        return EXIT_DECODE
    except ExpansionViolated as exc:
        print(f"expansion violated: {exc}", file=sys.stderr)
        return EXIT_EXPANSION
    except (ValueError, IndexError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if isinstance(result, int):
        return result
    timings, outputs = result
    if _record:
        _write_manifest(args, argv, timings, outputs)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
