"""Time the grid kernels on both backends.

    python benchmarks/bench_kernels.py [--size 256] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from tumorcheck import kernels


def cases(size, rng):
    allowed = (rng.random((size, size)) < 0.65).astype(np.uint8)
    seeds = (rng.random((size, size)) < 0.001).astype(np.uint8)
    return {
        "flood_fill": lambda impl: impl.flood_fill(allowed, seeds, False),
        "bfs_distance": lambda impl: impl.bfs_distance(seeds, False),
        "eg_fixpoint": lambda impl: impl.eg_fixpoint(allowed, False),
        "flood_fill/8": lambda impl: impl.flood_fill(allowed, seeds, True),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=256)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    table = cases(args.size, rng)
    names = sorted(kernels.BACKENDS)
    print(f"{args.size}x{args.size} grid, best of {args.repeat} (ms)")
    print(f"{'kernel':<14}" + "".join(f"{n:>10}" for n in names) + "   speedup")
    for kernel, fn in table.items():
        best = {}
        for n in names:
            impl = kernels.BACKENDS[n]
            fn(impl)  # warm caches
            best[n] = min(timeit.repeat(lambda: fn(impl), number=1, repeat=args.repeat)) * 1e3
        ratio = best["python"] / best["cython"] if "cython" in best else float("nan")
        print(f"{kernel:<14}" + "".join(f"{best[n]:>10.2f}" for n in names) + f"{ratio:>9.1f}x")


if __name__ == "__main__":
    main()
