"""Voxel grouping and neighbor enumeration.

intra_voxel_query assigns every point the dense rank of its flattened voxel
key, grouping points that share a voxel. inter_voxel_query enumerates, for
each voxel-sampled point, the non-empty voxels inside its Chebyshev
neighborhood through a key lookup table, skipping empty cells.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EvenNeighborSize, NonUniqueSampledVoxel, PointOutOfBounds
from .points import GroupAssignment, NeighborTable, PointBatch, VoxelGridSpec, _readonly


@dataclass(frozen=True)
class VoxelHashTable:
    """Injective map from flattened voxel key to dense voxel index.

    Indices are the ranks of the sorted unique keys, so index order is
    monotone in key.
    """

    keys: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "keys", _readonly(np.asarray(self.keys, dtype=np.int64)))

    @property
    def size(self) -> int:
        return self.keys.shape[0]

    def lookup(self, query_keys: np.ndarray) -> np.ndarray:
        """Voxel index per key, -1 where the key is absent."""
        query_keys = np.asarray(query_keys, dtype=np.int64)
        pos = np.searchsorted(self.keys, query_keys)
        pos_c = np.minimum(pos, self.size - 1)
        found = self.keys[pos_c] == query_keys
        return np.where(found, pos_c, -1)

    def __contains__(self, key: int) -> bool:
        return bool(self.lookup(np.asarray([key]))[0] >= 0)


def voxel_coords_3d(batch: PointBatch, grid: VoxelGridSpec) -> np.ndarray:
    """Integer (b, vx, vy, vz) per point.

    vi = floor((coord_i - min_r_i) / voxel_size), clamped into
    [0, axis_counts_i - 1] so points exactly on max_r land in the last voxel.

    Raises:
        PointOutOfBounds: a coordinate lies below min_r or above max_r.
    """
    below = batch.coords < grid.min_r
    above = batch.coords > grid.max_r
    bad = (below | above).any(axis=1)
    if bad.any():
        raise PointOutOfBounds(int(np.flatnonzero(bad)[0]))

    v = np.floor((batch.coords - grid.min_r) / grid.voxel_size).astype(np.int64)
    np.clip(v, 0, grid.axis_counts - 1, out=v)
    out = np.empty((batch.count, 4), dtype=np.int64)
    out[:, 0] = batch.batch_id
    out[:, 1:] = v
    return out


def flatten_3d_to_1d(vc_3d: np.ndarray, grid: VoxelGridSpec) -> np.ndarray:
    """Flatten (b, vx, vy, vz) tuples into 64-bit keys.

    key = b*Nx*Ny*Nz + vx*Ny*Nz + vy*Nz + vz; bijective over the grid domain.
    """
    vc_3d = np.asarray(vc_3d, dtype=np.int64)
    nx, ny, nz = (int(c) for c in grid.axis_counts)
    assert (vc_3d[:, 0] >= 0).all() and (vc_3d[:, 0] < grid.batch_count).all()
    assert (vc_3d[:, 1:] >= 0).all() and (vc_3d[:, 1:] < grid.axis_counts).all()
    return ((vc_3d[:, 0] * nx + vc_3d[:, 1]) * ny + vc_3d[:, 2]) * nz + vc_3d[:, 3]


def unflatten_1d_to_3d(keys: np.ndarray, grid: VoxelGridSpec) -> np.ndarray:
    """Inverse of flatten_3d_to_1d over the valid key domain."""
    keys = np.asarray(keys, dtype=np.int64)
    nx, ny, nz = (int(c) for c in grid.axis_counts)
    out = np.empty((keys.shape[0], 4), dtype=np.int64)
    out[:, 3] = keys % nz
    rest = keys // nz
    out[:, 2] = rest % ny
    rest = rest // ny
    out[:, 1] = rest % nx
    out[:, 0] = rest // nx
    return out


def intra_voxel_query(batch: PointBatch, grid: VoxelGridSpec) -> GroupAssignment:
    """Group points by voxel: each point gets the dense rank of its key."""
    keys = flatten_3d_to_1d(voxel_coords_3d(batch, grid), grid)
    unique, inverse = np.unique(keys, return_inverse=True)
    return GroupAssignment(
        group_id=inverse.astype(np.int64),
        group_count=int(unique.shape[0]),
        key=keys,
    )


def build_hash_table(assignment: GroupAssignment) -> VoxelHashTable:
    """One entry per unique key; the value is that key's group id."""
    return VoxelHashTable(keys=np.unique(assignment.key))


def generate_local_offsets(nbr_size: int) -> np.ndarray:
    """All integer offsets in [-c, c]^3 with c = nbr_size // 2.

    Row-major x, y, z loop order: first [-c,-c,-c], last [c,c,c]; always
    includes [0,0,0].

    Raises:
        EvenNeighborSize: nbr_size is even or < 1.
    """
    if nbr_size < 1 or nbr_size % 2 == 0:
        raise EvenNeighborSize(f"nbr_size must be odd and >= 1, got {nbr_size}")
    c = nbr_size // 2
    r = np.arange(-c, c + 1, dtype=np.int64)
    grids = np.meshgrid(r, r, r, indexing="ij")
    return np.stack(grids, axis=-1).reshape(-1, 3)


def inter_voxel_query(sampled: PointBatch, grid: VoxelGridSpec, nbr_size: int = 3) -> NeighborTable:
    """Enumerate non-empty neighbor voxels around each sampled point.

    Each sampled point must occupy its own voxel. Centers and neighbors are
    identified by voxel rank (the hash-table index), so on rank-ordered input
    (the output order of centroid sampling) these coincide with row indices.
    Neighbor candidates that leave the grid on any axis are rejected by
    coordinate check before key lookup, and offsets never alter the frame
    label, so neighborhoods cannot leak across frames.

    Raises:
        NonUniqueSampledVoxel: two sampled points share a voxel key.
        EvenNeighborSize: invalid nbr_size.
    """
    offsets = generate_local_offsets(nbr_size)
    vc = voxel_coords_3d(sampled, grid)
    keys = flatten_3d_to_1d(vc, grid)

    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]
    if sampled.count > 1 and (np.diff(sorted_keys) == 0).any():
        raise NonUniqueSampledVoxel("sampled points must be one per voxel")

    m = sampled.count
    vc_ranked = vc[order]
    nbr_coords = vc_ranked[:, None, 1:] + offsets[None, :, :]  # (M, K, 3)
    in_bounds = ((nbr_coords >= 0) & (nbr_coords < grid.axis_counts)).all(axis=2)

    nx, ny, nz = (int(c) for c in grid.axis_counts)
    b = vc_ranked[:, 0:1]
    cand_keys = ((b * nx + nbr_coords[:, :, 0]) * ny + nbr_coords[:, :, 1]) * nz + nbr_coords[:, :, 2]

    pos = np.searchsorted(sorted_keys, cand_keys)
    pos_c = np.minimum(pos, m - 1)
    found = in_bounds & (sorted_keys[pos_c] == cand_keys)

    centers = np.broadcast_to(np.arange(m, dtype=np.int64)[:, None], found.shape)
    return NeighborTable(nbr_indices=pos_c[found], inter_gid=centers[found])
