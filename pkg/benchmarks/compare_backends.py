"""Compare the compiled kernels against the numpy fallback.

Times each kernel with both backends on identical inputs and writes a CSV
`kernel,n,backend,median_ms,speedup`; speedup is python/compiled on the same
row pair. Run from the repository root:

    python3 benchmarks/compare_backends.py --out backends.csv
"""

from __future__ import annotations

import argparse
import csv
import sys
import time

import numpy as np

from avsample import _py_kernels

try:
    from avsample import _kernels
except ImportError:
    _kernels = None


def median_ms(fn, repeats=7, warmup=2):
    for _ in range(warmup):
        fn()
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter_ns()
        fn()
        times.append((time.perf_counter_ns() - t0) / 1e6)
    return float(np.median(times))


def segment_inputs(rng, rows, groups, cols=8):
    ids = np.concatenate([np.arange(groups), rng.integers(0, groups, size=rows - groups)])
    rng.shuffle(ids)
    order = np.argsort(ids, kind="stable").astype(np.int64)
    starts = np.zeros(groups + 1, dtype=np.int64)
    np.cumsum(np.bincount(ids, minlength=groups), out=starts[1:])
    values = np.ascontiguousarray(rng.normal(size=(rows, cols)))
    return values, order, starts


def cases(rng, threads):
    for rows in (100_000, 400_000):
        values, order, starts = segment_inputs(rng, rows, rows // 4)
        yield f"segment_sum", rows, lambda k: k.segment_sum(values, order, starts, threads)
        yield f"segment_max", rows, lambda k: k.segment_max(values, order, starts, threads)
    for n in (20_000, 60_000):
        coords = np.ascontiguousarray(rng.random((n, 3)))
        m = n // 4
        yield "fps_select", n, lambda k: k.fps_select(coords, m, 0)
    for n in (2_000, 8_000):
        pts = np.ascontiguousarray(rng.random((n, 3)))
        yield "knn_brute", n, lambda k: k.knn_brute(pts, pts, 27, threads)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="backends.csv")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    if _kernels is None:
        print("compiled extension not built; nothing to compare", file=sys.stderr)
        return 1

    rng = np.random.default_rng(args.seed)
    rows = []
    for kernel, n, runner in cases(rng, args.threads):
        t_py = median_ms(lambda: runner(_py_kernels))
        t_c = median_ms(lambda: runner(_kernels))
        rows.append({
            "kernel": kernel, "n": n, "backend": "python", "median_ms": f"{t_py:.3f}",
            "speedup": "",
        })
        rows.append({
            "kernel": kernel, "n": n, "backend": "compiled", "median_ms": f"{t_c:.3f}",
            "speedup": f"{t_py / t_c:.2f}",
        })
        print(f"{kernel:12s} n={n:>7d}  python {t_py:9.3f} ms  compiled {t_c:9.3f} ms  x{t_py / t_c:.2f}")

    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.DictWriter(fh, fieldnames=["kernel", "n", "backend", "median_ms", "speedup"],
                                lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
