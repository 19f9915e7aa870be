"""Benchmark the tree split-search kernel: compiled vs pure numpy.

The two backends are required to produce bitwise-identical results; this
script times them side by side on the same inputs and verifies equality
while it goes. Run:

    python3 benchmarks/bench_split_kernel.py [--rows 2000] [--cols 200]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from drugwatch.classifiers.kernels import (HAS_NUMBA, best_split_numba,
                                           best_split_numpy)


def _bench(fn, X, y, sample_idx, feature_idx, n_classes, repeats):
    # warm-up (includes JIT compilation for the compiled path)
    fn(X, y, sample_idx, feature_idx, n_classes)
    start = time.perf_counter()
    for _ in range(repeats):
        out = fn(X, y, sample_idx, feature_idx, n_classes)
    elapsed = (time.perf_counter() - start) / repeats
    return elapsed, out


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=2000)
    parser.add_argument("--cols", type=int, default=200)
    parser.add_argument("--classes", type=int, default=8)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    X = rng.random((args.rows, args.cols))
    # quantize so ties exercise the first-wins tie-break on both paths
    X = np.round(X, 2)
    y = rng.integers(0, args.classes, args.rows).astype(np.int64)
    sample_idx = np.arange(args.rows, dtype=np.int64)
    feature_idx = np.arange(args.cols, dtype=np.int64)

    print(f"split search over {args.rows} rows x {args.cols} features, "
          f"{args.classes} classes, mean of {args.repeats} runs")

    t_np, out_np = _bench(best_split_numpy, X, y, sample_idx, feature_idx,
                          args.classes, args.repeats)
    print(f"numpy backend:  {t_np * 1e3:9.2f} ms")

    if not HAS_NUMBA:
        print("numba backend:  not installed; nothing to compare")
        return 0

    t_nb, out_nb = _bench(best_split_numba, X, y, sample_idx, feature_idx,
                          args.classes, args.repeats)
    print(f"numba backend:  {t_nb * 1e3:9.2f} ms")
    print(f"speedup:        {t_np / t_nb:9.2f}x")

    same = (out_np[0] == out_nb[0] and out_np[1] == out_nb[1]
            and out_np[2] == out_nb[2])
    print(f"identical result: {same} "
          f"(feature={out_np[0]}, threshold={out_np[1]!r}, score={out_np[2]!r})")
    return 0 if same else 1


if __name__ == "__main__":
    raise SystemExit(main())
