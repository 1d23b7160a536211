"""Adaptive voxel-size point cloud downsampling and neighbor search.

Points are grouped by flattened voxel key ranking, sampled at per-voxel
coordinate means, and linked to neighboring voxels through constant-time key
lookups; a PI-controlled loop calibrates voxel sizes so the dataset-average
downsampling ratio matches a target. Hot kernels run in a compiled extension
when built, with a numpy fallback selected at import (see
``avsample.BACKEND_NAME``).
"""

__version__ = "0.1.0"

from ._backend import BACKEND_NAME, resolve_threads
from .baselines import FpsResult, farthest_point_sample, knn_search, uniform_subsample
from .bench import bench_rows, loglog_slope, prepare_case, time_runner, write_bench_csv
from .calibrate import (
    CalibrationConfig,
    CalibrationResult,
    CalibrationState,
    LayerCalibration,
    ScheduleEntry,
    StepRecord,
    calibrate_cascade,
    calibrate_layer,
    calibration_step,
    downsample_frames,
    measure_ratio,
    read_schedule,
    write_schedule,
)
from .datasets import DatasetManifest, load_manifest, load_ply, load_xyz, synth_dataset, write_xyz
from .points import (
    GroupAssignment,
    NeighborTable,
    PointBatch,
    VoxelGridSpec,
    grid_from_batch,
    make_grid,
    validate_batch,
)
from .query import (
    VoxelHashTable,
    build_hash_table,
    flatten_3d_to_1d,
    generate_local_offsets,
    inter_voxel_query,
    intra_voxel_query,
    unflatten_1d_to_3d,
    voxel_coords_3d,
)
from .sampling import (
    SampledLayer,
    centroid_sample,
    identity_transform,
    inter_aggregate,
    intra_aggregate,
    linear_transform,
    run_cascade,
)
from .segment import SegmentedMatrix, gather, scatter_reduce

__all__ = [
    "BACKEND_NAME",
    "CalibrationConfig",
    "CalibrationResult",
    "CalibrationState",
    "DatasetManifest",
    "FpsResult",
    "GroupAssignment",
    "LayerCalibration",
    "NeighborTable",
    "PointBatch",
    "SampledLayer",
    "ScheduleEntry",
    "SegmentedMatrix",
    "StepRecord",
    "VoxelGridSpec",
    "VoxelHashTable",
    "bench_rows",
    "build_hash_table",
    "calibrate_cascade",
    "calibrate_layer",
    "calibration_step",
    "centroid_sample",
    "downsample_frames",
    "farthest_point_sample",
    "flatten_3d_to_1d",
    "gather",
    "generate_local_offsets",
    "grid_from_batch",
    "identity_transform",
    "inter_aggregate",
    "inter_voxel_query",
    "intra_aggregate",
    "intra_voxel_query",
    "knn_search",
    "linear_transform",
    "load_manifest",
    "load_ply",
    "load_xyz",
    "loglog_slope",
    "make_grid",
    "measure_ratio",
    "prepare_case",
    "read_schedule",
    "resolve_threads",
    "run_cascade",
    "scatter_reduce",
    "synth_dataset",
    "time_runner",
    "unflatten_1d_to_3d",
    "uniform_subsample",
    "validate_batch",
    "voxel_coords_3d",
    "write_bench_csv",
    "write_schedule",
    "write_xyz",
]
