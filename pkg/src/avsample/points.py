"""Core data model: batched point clouds, voxel grids, groupings, neighbor tables.

All types are immutable after construction (backing arrays are marked
read-only) and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput, KeySpaceOverflow, NonFiniteCoordinate, RaggedFeatures

_KEY_SPACE = 2**63  # flattened voxel keys are signed 64-bit


def _readonly(a: np.ndarray) -> np.ndarray:
    # a read-only view shares the buffer without touching the caller's flags
    view = np.ascontiguousarray(a).view()
    view.flags.writeable = False
    return view


@dataclass(frozen=True)
class PointBatch:
    """A batch of points from one or more frames.

    Attributes:
        batch_id: per-point frame label, dense in 0..frame_count-1, shape (N,).
        coords: per-point xyz in meters, shape (N, 3), finite.
        features: optional per-point feature rows, shape (N, F), or None.
    """

    batch_id: np.ndarray
    coords: np.ndarray
    features: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "batch_id", _readonly(np.asarray(self.batch_id, dtype=np.int64)))
        object.__setattr__(self, "coords", _readonly(np.asarray(self.coords, dtype=np.float64)))
        if self.features is not None:
            object.__setattr__(self, "features", _readonly(np.asarray(self.features, dtype=np.float64)))
            if self.features.shape[0] != self.coords.shape[0]:
                raise ValueError("features row count must equal point count")

    @property
    def count(self) -> int:
        return self.coords.shape[0]

    @property
    def frame_count(self) -> int:
        return int(self.batch_id.max()) + 1 if self.count else 0


@dataclass(frozen=True)
class VoxelGridSpec:
    """An axis-aligned voxel grid covering [min_r, max_r] at a fixed cell size.

    axis_counts[i] = ceil((max_r[i] - min_r[i]) / voxel_size), at least 1 per
    axis so a degenerate extent still yields one voxel.
    """

    voxel_size: float
    min_r: np.ndarray
    max_r: np.ndarray
    axis_counts: np.ndarray
    batch_count: int

    def __post_init__(self):
        object.__setattr__(self, "min_r", _readonly(np.asarray(self.min_r, dtype=np.float64)))
        object.__setattr__(self, "max_r", _readonly(np.asarray(self.max_r, dtype=np.float64)))
        object.__setattr__(self, "axis_counts", _readonly(np.asarray(self.axis_counts, dtype=np.int64)))

    @property
    def keys_per_frame(self) -> int:
        nx, ny, nz = (int(c) for c in self.axis_counts)
        return nx * ny * nz


@dataclass(frozen=True)
class GroupAssignment:
    """Per-point dense group ids plus the flattened voxel key each id ranks.

    Two points share a group_id iff they share a key, and group ids are the
    dense ranks of the sorted unique keys (monotone: larger key, larger id).
    """

    group_id: np.ndarray
    group_count: int
    key: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "group_id", _readonly(np.asarray(self.group_id, dtype=np.int64)))
        object.__setattr__(self, "key", _readonly(np.asarray(self.key, dtype=np.int64)))


@dataclass(frozen=True)
class NeighborTable:
    """Flattened (center, neighbor) voxel pairs surviving the empty-voxel mask.

    nbr_indices holds sampled-point indices in voxel-rank order; inter_gid is
    the parallel list of owning center ids. Every center pairs with itself
    exactly once (offset [0,0,0]).
    """

    nbr_indices: np.ndarray
    inter_gid: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "nbr_indices", _readonly(np.asarray(self.nbr_indices, dtype=np.int64)))
        object.__setattr__(self, "inter_gid", _readonly(np.asarray(self.inter_gid, dtype=np.int64)))
        if self.nbr_indices.shape != self.inter_gid.shape:
            raise ValueError("nbr_indices and inter_gid must have equal length")

    @property
    def entry_count(self) -> int:
        return self.nbr_indices.shape[0]


def validate_batch(raw_points) -> PointBatch:
    """Normalize raw (frame, xyz[, feature_row]) records into a PointBatch.

    Frame labels are remapped to a dense 0..B-1 range preserving first
    occurrence order. Rows with non-finite coordinates are rejected, and all
    feature rows must share one width.

    Args:
        raw_points: iterable of (frame, xyz) or (frame, xyz, feature_row).

    Raises:
        EmptyInput, NonFiniteCoordinate, RaggedFeatures.
    """
    records = list(raw_points)
    if not records:
        raise EmptyInput("no points to validate")

    frames = np.empty(len(records), dtype=np.int64)
    coords = np.empty((len(records), 3), dtype=np.float64)
    feat_rows: list[np.ndarray] | None = None

    for i, rec in enumerate(records):
        frame, xyz = rec[0], np.asarray(rec[1], dtype=np.float64).reshape(3)
        frames[i] = int(frame)
        coords[i] = xyz
        if len(rec) > 2 and rec[2] is not None:
            row = np.atleast_1d(np.asarray(rec[2], dtype=np.float64))
            if feat_rows is None:
                if i != 0:
                    raise RaggedFeatures(i)
                feat_rows = []
            elif row.shape != feat_rows[0].shape:
                raise RaggedFeatures(i)
            feat_rows.append(row)
        elif feat_rows is not None:
            raise RaggedFeatures(i)

    if frames.min() < 0:
        raise ValueError("frame labels must be non-negative")
    bad = ~np.isfinite(coords).all(axis=1)
    if bad.any():
        raise NonFiniteCoordinate(int(np.flatnonzero(bad)[0]))

    # Dense remap preserving first-occurrence order.
    _, first_pos, inverse = np.unique(frames, return_index=True, return_inverse=True)
    order_of_first = np.argsort(np.argsort(first_pos))
    batch_id = order_of_first[inverse]

    features = np.vstack(feat_rows) if feat_rows is not None else None
    return PointBatch(batch_id=batch_id, coords=coords, features=features)


def make_grid(min_r, max_r, voxel_size: float, batch_count: int) -> VoxelGridSpec:
    """Build a VoxelGridSpec over explicit bounds, checking the key space."""
    if voxel_size <= 0:
        raise ValueError("voxel_size must be positive")
    min_r = np.asarray(min_r, dtype=np.float64)
    max_r = np.asarray(max_r, dtype=np.float64)
    if not np.all(max_r >= min_r):
        raise ValueError("max_r must be >= min_r componentwise")

    extent = max_r - min_r
    axis_counts = np.maximum(np.ceil(extent / voxel_size).astype(np.int64), 1)

    total = batch_count
    for c in axis_counts:
        total *= int(c)
        if total >= _KEY_SPACE:
            raise KeySpaceOverflow(
                f"grid needs {batch_count} x {'x'.join(str(int(a)) for a in axis_counts)} keys"
            )
    return VoxelGridSpec(
        voxel_size=float(voxel_size),
        min_r=min_r,
        max_r=max_r,
        axis_counts=axis_counts,
        batch_count=int(batch_count),
    )


def grid_from_batch(batch: PointBatch, voxel_size: float, padding: float = 0.0) -> VoxelGridSpec:
    """Build a grid whose bounds are the batch extrema expanded by padding."""
    if padding < 0:
        raise ValueError("padding must be non-negative")
    if batch.count == 0:
        raise EmptyInput("cannot build a grid over zero points")
    min_r = batch.coords.min(axis=0) - padding
    max_r = batch.coords.max(axis=0) + padding
    return make_grid(min_r, max_r, voxel_size, batch.frame_count)
