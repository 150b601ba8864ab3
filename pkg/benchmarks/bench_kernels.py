"""Compare the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--n 65536] [--m 1280] [--p 2] [--repeat 5]
"""
import argparse

from bitmasked import kernel_bench
from bitmasked.kernels import BACKENDS

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=1 << 16)
    ap.add_argument("--m", type=int, default=1280)
    ap.add_argument("--p", type=int, default=2)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if "cython" not in BACKENDS:
        print("compiled extension not built; timing the numpy fallback only")
    print(kernel_bench.format_rows(kernel_bench.run(args.n, args.m, args.p, args.repeat)))
