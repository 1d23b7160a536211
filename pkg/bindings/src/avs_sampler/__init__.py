"""Array-in/array-out entry points for scripting pipelines.

Five wrappers around the avsample pipeline, taking and returning plain numpy
arrays. Inputs are used zero-copy when they are already contiguous float64;
results are the primary pipeline's own arrays (read-only views), bit-identical
to composing the avsample API directly. Errors raise the avsample exception
types unchanged. Compiled kernels release the GIL while running.
"""

from __future__ import annotations

import numpy as np

import avsample
from avsample.errors import EmptyInput, NonFiniteCoordinate

__version__ = "0.1.0"

__all__ = [
    "calibrate_cascade",
    "farthest_point_sample",
    "inter_voxel_query",
    "intra_voxel_query",
    "py_sample",
]


def _as_batch(coords) -> avsample.PointBatch:
    arr = np.ascontiguousarray(coords, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError(f"expected an N x 3 coordinate array, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise EmptyInput("no points")
    bad = ~np.isfinite(arr).all(axis=1)
    if bad.any():
        raise NonFiniteCoordinate(int(np.flatnonzero(bad)[0]))
    frame = np.zeros(arr.shape[0], dtype=np.int64)
    return avsample.PointBatch(batch_id=frame, coords=arr)


def intra_voxel_query(coords, voxel_size: float) -> np.ndarray:
    """Per-point voxel group ids for one frame of coordinates."""
    batch = _as_batch(coords)
    grid = avsample.grid_from_batch(batch, voxel_size)
    return avsample.intra_voxel_query(batch, grid).group_id


def py_sample(coords, voxel_size: float) -> tuple[np.ndarray, np.ndarray]:
    """Voxel-centroid downsampling of one frame.

    Returns:
        (M x 3 centroid coordinates, length-N group ids).
    """
    batch = _as_batch(coords)
    grid = avsample.grid_from_batch(batch, voxel_size)
    assignment = avsample.intra_voxel_query(batch, grid)
    centroids = avsample.centroid_sample(batch, assignment)
    return centroids.coords, assignment.group_id


def inter_voxel_query(
    coords, voxel_size: float, nbr_size: int = 3, min_r=None, max_r=None
) -> tuple[np.ndarray, np.ndarray]:
    """Neighbor enumeration over voxel-unique sampled points.

    Pass min_r/max_r to reuse the grid the points were sampled under;
    re-deriving bounds from centroid extrema would shift the cell origin and
    can merge previously distinct voxels. Defaults derive bounds from coords.

    Returns:
        (nbr_indices, inter_gid) flat pair arrays in voxel-rank order.
    """
    batch = _as_batch(coords)
    if min_r is not None or max_r is not None:
        if min_r is None or max_r is None:
            raise ValueError("pass both min_r and max_r or neither")
        grid = avsample.make_grid(min_r, max_r, voxel_size, batch.frame_count)
    else:
        grid = avsample.grid_from_batch(batch, voxel_size)
    table = avsample.inter_voxel_query(batch, grid, nbr_size)
    return table.nbr_indices, table.inter_gid


def farthest_point_sample(coords, m: int, seed_index: int = 0) -> np.ndarray:
    """Greedy max-min selection; returns the m selected row indices."""
    return avsample.farthest_point_sample(_as_batch(coords), m, seed_index).selected_indices


def calibrate_cascade(
    frames,
    ref_ratios,
    v0: float,
    k_p: float | None = None,
    k_i: float | None = None,
    i_r: float = 1.0,
    epsilon: float = 1e-3,
    max_iterations: int = 500,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Calibrate per-layer voxel sizes over a list of coordinate arrays.

    Returns:
        (voxel_sizes, achieved_ratios, converged) arrays, one entry per layer.
    """
    batches = [_as_batch(f) for f in frames]
    configs = [
        avsample.CalibrationConfig(
            ref_ratio=float(r), v0=v0, k_p=k_p, k_i=k_i, i_r=i_r,
            epsilon=epsilon, max_iterations=max_iterations,
        )
        for r in ref_ratios
    ]
    result = avsample.calibrate_cascade(batches, configs)
    return (
        np.array([layer.voxel_size for layer in result.layers]),
        np.array([layer.achieved_ratio for layer in result.layers]),
        np.array([layer.converged for layer in result.layers]),
    )
