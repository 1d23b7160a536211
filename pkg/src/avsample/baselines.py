"""Reference samplers: greedy farthest-point selection and exact brute kNN.

Both serve as correctness oracles and as the slow ends of the latency
comparison; neither is accelerated beyond the kernel backend.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import kernels, resolve_threads
from .errors import KOutOfRange, MOutOfRange
from .points import PointBatch


@dataclass(frozen=True)
class FpsResult:
    """selected_indices in selection order; min_dists is each point's
    distance to the nearest selected point at termination."""

    selected_indices: np.ndarray
    min_dists: np.ndarray


def _require_single_frame(batch: PointBatch, name: str) -> None:
    if batch.frame_count > 1:
        raise ValueError(f"{name} expects a single frame; split batches per frame")


def farthest_point_sample(batch: PointBatch, m: int, seed_index: int = 0) -> FpsResult:
    """Greedy max-min selection of m points, ties broken by smallest index."""
    _require_single_frame(batch, "farthest_point_sample")
    if not 1 <= m <= batch.count:
        raise MOutOfRange(f"m={m} outside [1, {batch.count}]")
    if not 0 <= seed_index < batch.count:
        raise ValueError(f"seed_index={seed_index} outside [0, {batch.count})")
    coords = np.ascontiguousarray(batch.coords)
    selected, min_dists = kernels.fps_select(coords, int(m), int(seed_index))
    return FpsResult(selected_indices=selected, min_dists=min_dists)


def knn_search(
    queries: PointBatch, references: PointBatch, k: int, threads: int | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Exact Euclidean k nearest references per query.

    Returns (indices, distances), each (Q, k), ascending by distance with
    ties resolved to the smaller reference index.
    """
    _require_single_frame(queries, "knn_search")
    _require_single_frame(references, "knn_search")
    if not 1 <= k <= references.count:
        raise KOutOfRange(f"k={k} outside [1, {references.count}]")
    q = np.ascontiguousarray(queries.coords)
    r = np.ascontiguousarray(references.coords)
    return kernels.knn_brute(q, r, int(k), resolve_threads(threads))


def uniform_subsample(batch: PointBatch, m: int, rng_seed: int = 0) -> np.ndarray:
    """m point indices drawn uniformly without replacement (trivial baseline)."""
    if not 1 <= m <= batch.count:
        raise MOutOfRange(f"m={m} outside [1, {batch.count}]")
    rng = np.random.default_rng(rng_seed)
    return np.sort(rng.choice(batch.count, size=m, replace=False))
