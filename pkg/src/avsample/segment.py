"""Group-indexed parallel reductions (scatter) and their inverse (gather).

scatter_reduce collapses rows sharing a segment id into one output row per
segment; gather broadcasts per-segment rows back to the input shape. Both are
pure, and scatter_reduce accumulates each segment in ascending input row
order no matter how many threads run, so parallel output is bit-identical to
sequential output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import kernels, resolve_threads
from .errors import SegmentIdOutOfRange

MODES = ("sum", "max", "mean", "count")


@dataclass(frozen=True)
class SegmentedMatrix:
    """An R x C value matrix with a segment id per row.

    Every id in [0, segment_count) must occur at least once.
    """

    values: np.ndarray
    segment_id: np.ndarray
    segment_count: int

    def __post_init__(self):
        object.__setattr__(self, "values", np.ascontiguousarray(self.values, dtype=np.float64))
        object.__setattr__(self, "segment_id", np.ascontiguousarray(self.segment_id, dtype=np.int64))
        if self.values.ndim != 2:
            raise ValueError("values must be 2-D")
        if self.segment_id.shape != (self.values.shape[0],):
            raise ValueError("segment_id length must equal the value row count")


def _check_ids(segment_id: np.ndarray, segment_count: int) -> None:
    bad = (segment_id < 0) | (segment_id >= segment_count)
    if bad.any():
        raise SegmentIdOutOfRange(int(np.flatnonzero(bad)[0]))


def _segment_layout(segment_id: np.ndarray, segment_count: int) -> tuple[np.ndarray, np.ndarray]:
    order = np.argsort(segment_id, kind="stable")
    counts = np.bincount(segment_id, minlength=segment_count)
    assert counts.min() > 0, "empty segments violate the grouping contract"
    starts = np.zeros(segment_count + 1, dtype=np.int64)
    np.cumsum(counts, out=starts[1:])
    return order.astype(np.int64), starts


def scatter_reduce(input: SegmentedMatrix, mode: str, threads: int | None = None):
    """Reduce rows per segment.

    Args:
        input: segmented matrix; every segment must be non-empty.
        mode: one of "sum", "max", "mean", "count".
        threads: kernel worker count (default: AVS_THREADS or 1).

    Returns:
        M x C array for sum/mean; (M x C values, M x C argmax row indices)
        for max, ties resolved to the smallest input row; M x 1 int64 counts
        for count. mean is computed as sum followed by division.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    _check_ids(input.segment_id, input.segment_count)
    nthreads = resolve_threads(threads)

    if mode == "count":
        counts = np.bincount(input.segment_id, minlength=input.segment_count)
        return counts.reshape(-1, 1).astype(np.int64)

    order, starts = _segment_layout(input.segment_id, input.segment_count)
    if mode == "sum":
        return kernels.segment_sum(input.values, order, starts, nthreads)
    if mode == "max":
        return kernels.segment_max(input.values, order, starts, nthreads)
    sums = kernels.segment_sum(input.values, order, starts, nthreads)
    counts = np.diff(starts).astype(np.float64)
    return sums / counts[:, None]


def gather(reduced: np.ndarray, segment_id: np.ndarray) -> np.ndarray:
    """Align per-segment rows back to input rows: out[r] = reduced[segment_id[r]]."""
    reduced = np.asarray(reduced)
    segment_id = np.asarray(segment_id, dtype=np.int64)
    _check_ids(segment_id, reduced.shape[0])
    return reduced[segment_id]
