"""Centroid sampling and the intra/inter feature aggregation pipelines.

Feature transforms are caller-supplied pure row-wise callables
(R x D -> R x D'); identity and fixed linear maps are provided. Aggregation
concatenates features first, relative offsets second.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyLayer, TransformRowCountMismatch
from .points import GroupAssignment, NeighborTable, PointBatch, VoxelGridSpec, grid_from_batch, make_grid
from .query import inter_voxel_query, intra_voxel_query
from .segment import SegmentedMatrix, gather, scatter_reduce

MISSING_FEATURE_MODES = ("coords", "ones")


def identity_transform(x: np.ndarray) -> np.ndarray:
    return x


def linear_transform(weight: np.ndarray, bias: np.ndarray | None = None):
    """A fixed linear map x -> x @ weight (+ bias) usable as a transform."""
    weight = np.asarray(weight, dtype=np.float64)

    def apply(x: np.ndarray) -> np.ndarray:
        out = x @ weight
        if bias is not None:
            out = out + bias
        return out

    return apply


@dataclass(frozen=True)
class SampledLayer:
    """One downsampling stage: centroid points plus their aggregated features."""

    points: PointBatch
    features: np.ndarray
    assignment: GroupAssignment
    grid: VoxelGridSpec

    def __post_init__(self):
        if self.points.count != self.assignment.group_count:
            raise ValueError("one sampled point per group required")


def _input_features(batch: PointBatch, missing_features: str) -> np.ndarray:
    if batch.features is not None:
        return batch.features
    if missing_features == "coords":
        return batch.coords
    if missing_features == "ones":
        return np.ones((batch.count, 1), dtype=np.float64)
    raise ValueError(f"missing_features must be one of {MISSING_FEATURE_MODES}")


def _apply_transform(transform, x: np.ndarray) -> np.ndarray:
    y = np.asarray(transform(x), dtype=np.float64)
    if y.ndim != 2 or y.shape[0] != x.shape[0]:
        raise TransformRowCountMismatch(
            f"transform mapped {x.shape[0]} rows to shape {y.shape}"
        )
    return y


def centroid_sample(batch: PointBatch, assignment: GroupAssignment) -> PointBatch:
    """One point per voxel at the mean coordinate of its members.

    Output points are ordered by group id (voxel-rank order). The frame label
    of a group is the shared label of its members; groups never span frames
    because the frame term dominates the flattened key.
    """
    means = scatter_reduce(
        SegmentedMatrix(batch.coords, assignment.group_id, assignment.group_count), "mean"
    )
    group_frame = np.empty(assignment.group_count, dtype=np.int64)
    group_frame[assignment.group_id] = batch.batch_id
    return PointBatch(batch_id=group_frame, coords=means)


def intra_aggregate(
    batch: PointBatch,
    assignment: GroupAssignment,
    centroids: PointBatch,
    transform=identity_transform,
    missing_features: str = "coords",
) -> np.ndarray:
    """Max-pool transformed (features, offset-to-centroid) rows per voxel.

    Rows are the input features (coords or a constant column when the batch
    carries none) concatenated with each point's offset from its voxel
    centroid; the transform output is max-reduced per group.
    """
    feats = _input_features(batch, missing_features)
    offsets = batch.coords - gather(centroids.coords, assignment.group_id)
    y = _apply_transform(transform, np.hstack([feats, offsets]))
    pooled, _ = scatter_reduce(SegmentedMatrix(y, assignment.group_id, assignment.group_count), "max")
    return pooled


def inter_aggregate(layer: SampledLayer, table: NeighborTable, transform=identity_transform) -> np.ndarray:
    """Sum transformed (neighbor features, relative position) rows per center.

    For every surviving (center, neighbor) pair, the neighbor's features are
    concatenated with its position relative to the center, transformed, and
    sum-reduced onto the center. Layer rows must be in voxel-rank order,
    which SampledLayer guarantees.
    """
    f_nbr = gather(layer.features, table.nbr_indices)
    p_nbr = gather(layer.points.coords, table.nbr_indices)
    p_center = gather(layer.points.coords, table.inter_gid)
    y = _apply_transform(transform, np.hstack([f_nbr, p_nbr - p_center]))
    return scatter_reduce(SegmentedMatrix(y, table.inter_gid, layer.points.count), "sum")


def run_cascade(
    batch: PointBatch,
    layer_sizes,
    nbr_size: int = 3,
    transform=identity_transform,
    padding: float = 0.0,
    missing_features: str = "coords",
) -> list[SampledLayer]:
    """Chain downsampling layers at arbitrary voxel sizes.

    Layer k re-grids layer k-1's centroids at layer_sizes[k] over the bounds
    of the original batch, so flattened keys stay comparable across layers.
    Each layer runs centroid sampling, intra aggregation, neighbor
    enumeration, and inter aggregation; the inter output feeds the next layer
    as its features.
    """
    layer_sizes = [float(s) for s in layer_sizes]
    if not layer_sizes:
        raise ValueError("at least one layer size required")
    if any(s <= 0 for s in layer_sizes):
        raise ValueError("layer sizes must be positive")

    base = grid_from_batch(batch, layer_sizes[0], padding)
    current = batch
    layers: list[SampledLayer] = []
    for size in layer_sizes:
        grid = make_grid(base.min_r, base.max_r, size, base.batch_count)
        assignment = intra_voxel_query(current, grid)
        centroids = centroid_sample(current, assignment)
        if centroids.count == 0:
            raise EmptyLayer("cascade layer produced zero points")
        pooled = intra_aggregate(current, assignment, centroids, transform, missing_features)
        stage = SampledLayer(points=centroids, features=pooled, assignment=assignment, grid=grid)
        table = inter_voxel_query(centroids, grid, nbr_size)
        fused = inter_aggregate(stage, table, transform)
        layers.append(SampledLayer(points=centroids, features=fused, assignment=assignment, grid=grid))
        current = PointBatch(batch_id=centroids.batch_id, coords=centroids.coords, features=fused)
    return layers
