"""Compare the compiled and numpy product-chain kernels.

Usage: python3 benchmarks/bench_kernels.py [--cells N] [--repeat R]
"""
import argparse
import time

import numpy as np

from commevo import kernels
from commevo.evolution import dyadic_partition, product_approximant
from commevo.nilpotent import heisenberg_family


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_chain(name, n, cells, repeat, rng):
    coefs = rng.normal(size=(cells, n)) + 1j * rng.normal(size=(cells, n))
    durs = np.full(cells, 1.0 / cells)
    x0 = rng.normal(size=(n, 1)) + 0j
    out = {}
    for impl in kernels.available():
        mod = kernels.get(impl)

        def run():
            acc = x0.copy()
            mod.superdiag_chain(coefs, durs, acc)
            out[impl] = acc

        out[impl + "_t"] = _best(run, repeat)
    ref = out["numpy"]
    for impl in kernels.available():
        dev = float(np.max(np.abs(out[impl] - ref)))
        ns = 1e9 * out[impl + "_t"] / cells
        print(f"{name:14s} {impl:9s} {cells:9d} cells  {ns:8.1f} ns/cell  max dev {dev:.1e}")


def bench_end_to_end(level, repeat):
    F = heisenberg_family()
    x = np.array([0.0, 0.0, 1.0], dtype=complex)
    part = dyadic_partition(0.0, 1.0, level)
    t = _best(lambda: product_approximant(F, part, 0.0, 1.0, x), repeat)
    print(f"product approximant, level {level} ({kernels.IMPLEMENTATION}): {t:.3f} s")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--cells", type=int, default=1 << 18)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--level", type=int, default=20)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print("kernels built:", ", ".join(kernels.available()))
    bench_chain("heisenberg 3x3", 3, args.cells, args.repeat, rng)
    bench_chain("nilpotent 4x4", 4, args.cells, args.repeat, rng)
    bench_end_to_end(args.level, args.repeat)


if __name__ == "__main__":
    main()
