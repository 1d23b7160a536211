"""Latency measurement harness for the sampling and neighbor-search methods.

Timing uses the monotonic clock with warmup runs excluded; rows report the
median and the 10th/90th percentile spread. Grouping methods run at a mean
downsampling ratio of 4, and the neighbor searches run on the downsampled
cloud.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass

import numpy as np

from .baselines import farthest_point_sample, knn_search
from .datasets import _generate_frame
from .points import PointBatch, VoxelGridSpec, grid_from_batch
from .query import inter_voxel_query, intra_voxel_query
from .sampling import centroid_sample

METHODS = ("fps", "intra", "knn", "inter")
CSV_HEADER = ("method", "n", "median_ms", "p10_ms", "p90_ms")


def cell_density_for_ratio(ratio: float) -> float:
    """Mean points per cell so uniform points group at the given ratio.

    For Poisson-distributed cell counts with mean lam, the expected
    input/non-empty ratio is lam / (1 - exp(-lam)); solve for lam by fixed
    point iteration.
    """
    lam = ratio
    for _ in range(100):
        lam = ratio * (1.0 - math.exp(-lam))
    return lam


@dataclass(frozen=True)
class BenchCase:
    """Shared inputs for one point count."""

    frame: PointBatch
    grid: VoxelGridSpec
    sampled: PointBatch
    sample_count: int
    neighbor_k: int


def prepare_case(n: int, seed: int, nbr_size: int = 3, target_ratio: float = 4.0) -> BenchCase:
    frame = _generate_frame("uniform_cube", n, seed, {})
    voxel_size = (cell_density_for_ratio(target_ratio) / n) ** (1.0 / 3.0)
    grid = grid_from_batch(frame, voxel_size)
    sampled = centroid_sample(frame, intra_voxel_query(frame, grid))
    return BenchCase(
        frame=frame,
        grid=grid,
        sampled=sampled,
        sample_count=max(1, n // int(target_ratio)),
        neighbor_k=min(nbr_size**3, sampled.count),
    )


def make_runner(method: str, case: BenchCase, nbr_size: int, threads: int | None):
    if method == "fps":
        return lambda: farthest_point_sample(case.frame, case.sample_count)
    if method == "intra":
        return lambda: intra_voxel_query(case.frame, case.grid)
    if method == "knn":
        return lambda: knn_search(case.sampled, case.sampled, case.neighbor_k, threads)
    if method == "inter":
        return lambda: inter_voxel_query(case.sampled, case.grid, nbr_size)
    raise ValueError(f"unknown method {method!r}")


def time_runner(fn, repeats: int, warmup: int) -> tuple[float, float, float]:
    """(median_ms, p10_ms, p90_ms) over `repeats` timed runs."""
    for _ in range(warmup):
        fn()
    times = np.empty(repeats, dtype=np.float64)
    for i in range(repeats):
        t0 = time.perf_counter_ns()
        fn()
        times[i] = (time.perf_counter_ns() - t0) / 1e6
    p10, p50, p90 = np.percentile(times, [10, 50, 90])
    return float(p50), float(p10), float(p90)


def bench_rows(
    sizes,
    methods,
    repeats: int = 100,
    warmup: int = 10,
    seed: int = 0,
    nbr_size: int = 3,
    threads: int | None = None,
) -> list[dict]:
    """One row per (method, n), sizes ascending."""
    sizes = [int(n) for n in sizes]
    if sizes != sorted(sizes):
        raise ValueError("sizes must be ascending")
    for method in methods:
        if method not in METHODS:
            raise ValueError(f"unknown method {method!r}")
    rows = []
    for n in sizes:
        case = prepare_case(n, seed, nbr_size)
        for method in methods:
            fn = make_runner(method, case, nbr_size, threads)
            median, p10, p90 = time_runner(fn, repeats, warmup)
            rows.append({"method": method, "n": n, "median_ms": median, "p10_ms": p10, "p90_ms": p90})
    return rows


def write_bench_csv(path, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_HEADER, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def loglog_slope(ns, latencies_ms) -> float:
    """Least-squares slope of log(latency) against log(n)."""
    x = np.log(np.asarray(ns, dtype=np.float64))
    y = np.log(np.asarray(latencies_ms, dtype=np.float64))
    return float(np.polyfit(x, y, 1)[0])
