"""PI-controlled voxel size calibration.

A closed loop measures the dataset-average downsampling ratio at the current
voxel size, feeds the deviation from a target ratio through a
proportional-integral controller, and nudges a log-space scale factor until
the measured ratio lands within tolerance. The derived voxel size is
v0 * exp(scale), so it stays positive and grows monotonically with scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import EmptyDataset
from .points import PointBatch, grid_from_batch
from .query import intra_voxel_query
from .sampling import centroid_sample


def logistic(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


@dataclass(frozen=True)
class CalibrationConfig:
    """Targets and gains for one calibration loop.

    epsilon bounds |target - measured| directly; with relative_epsilon it
    bounds the deviation as a fraction of ref_ratio instead. The error
    integral is clamped to +/- integral_limit (anti-windup).

    Gain defaults are library choices tuned for stable convergence on
    synthetic data: the measured ratio responds to scale roughly in
    proportion to the ratio itself, so k_p and k_i default to 0.8/ref_ratio
    and 0.16/ref_ratio to keep the loop gain level across targets. Fixed
    gains at high targets oscillate without settling.
    """

    ref_ratio: float
    v0: float
    i_r: float = 1.0
    k_p: float | None = None
    k_i: float | None = None
    epsilon: float = 1e-3
    max_iterations: int = 500
    relative_epsilon: bool = False
    integral_limit: float = 100.0
    frame_stride: int = 1
    padding: float = 0.0

    def __post_init__(self):
        if self.ref_ratio <= 1:
            raise ValueError("ref_ratio must exceed 1")
        if self.v0 <= 0 or self.i_r <= 0:
            raise ValueError("v0 and i_r must be positive")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.frame_stride < 1:
            raise ValueError("frame_stride must be >= 1")
        if self.k_p is None:
            object.__setattr__(self, "k_p", 0.8 / self.ref_ratio)
        if self.k_i is None:
            object.__setattr__(self, "k_i", 0.16 / self.ref_ratio)

    def tolerance(self) -> float:
        return self.epsilon * self.ref_ratio if self.relative_epsilon else self.epsilon


@dataclass(frozen=True)
class StepRecord:
    voxel_size: float
    ratio: float
    err: float


@dataclass(frozen=True)
class CalibrationState:
    """Controller state; history holds one record per completed iteration."""

    scale: float = 0.0
    err_integral: float = 0.0
    iteration: int = 0
    history: tuple[StepRecord, ...] = ()


@dataclass(frozen=True)
class LayerCalibration:
    """Outcome of calibrating one layer.

    voxel_size is the size at which achieved_ratio was measured, so
    re-measuring at it reproduces the ratio.
    """

    voxel_size: float
    achieved_ratio: float
    converged: bool
    state: CalibrationState


@dataclass(frozen=True)
class CalibrationResult:
    layers: tuple[LayerCalibration, ...]

    @property
    def voxel_sizes(self) -> list[float]:
        return [layer.voxel_size for layer in self.layers]

    @property
    def converged(self) -> bool:
        return all(layer.converged for layer in self.layers)


def measure_ratio(dataset, voxel_size: float, padding: float = 0.0, frame_stride: int = 1):
    """Dataset-wide downsampling ratio at a voxel size.

    Sums input point counts and non-empty voxel counts over the frames, in
    frame order, using per-frame grid bounds.

    Returns:
        (n_input, n_sampled, ratio) with ratio = n_input / n_sampled.

    Raises:
        EmptyDataset: the iterator yielded no frames.
    """
    n_input = 0
    n_sampled = 0
    for i, frame in enumerate(dataset):
        if frame_stride > 1 and i % frame_stride:
            continue
        grid = grid_from_batch(frame, voxel_size, padding)
        assignment = intra_voxel_query(frame, grid)
        n_input += frame.count
        n_sampled += assignment.group_count
    if n_sampled == 0:
        raise EmptyDataset("no frames to measure")
    return n_input, n_sampled, n_input / n_sampled


def calibration_step(state: CalibrationState, config: CalibrationConfig, achieved_ratio: float) -> CalibrationState:
    """One controller update from a measured ratio.

    err = ref_ratio - achieved_ratio accumulates into the clamped integral;
    the combined signal moves scale by i_r * (logistic(signal) - 0.5), which
    bounds every step below i_r / 2 in magnitude. The appended record carries
    the post-update derived voxel size, i.e. the size for the next pass.
    """
    err = config.ref_ratio - achieved_ratio
    integral = state.err_integral + err
    integral = max(-config.integral_limit, min(config.integral_limit, integral))
    signal = config.k_p * err + config.k_i * integral
    # keep the logistic off its float64 saturation points so every step stays
    # strictly below i_r / 2 in magnitude
    signal = max(-36.0, min(36.0, signal))
    scale = state.scale + config.i_r * (logistic(signal) - 0.5)
    record = StepRecord(voxel_size=config.v0 * math.exp(scale), ratio=achieved_ratio, err=err)
    return CalibrationState(
        scale=scale,
        err_integral=integral,
        iteration=state.iteration + 1,
        history=state.history + (record,),
    )


def calibrate_layer(dataset, config: CalibrationConfig) -> LayerCalibration:
    """Iterate measure + controller step until the ratio lands within tolerance.

    The dataset must be re-iterable; every iteration is one full pass over
    it. When max_iterations is exhausted the best-effort result is returned
    with converged=False.

    The measured ratio is a step function of voxel size, and datasets whose
    frames share one extent stack their per-frame discontinuities into
    cliffs; a tight epsilon on such data can leave the loop cycling across
    the target. Remedies: a looser or relative epsilon, smaller gains, or
    frames with varied extents.
    """
    state = CalibrationState()
    tol = config.tolerance()
    size = config.v0
    ratio = math.nan
    for _ in range(config.max_iterations):
        size = config.v0 * math.exp(state.scale)
        _, _, ratio = measure_ratio(dataset, size, config.padding, config.frame_stride)
        state = calibration_step(state, config, ratio)
        if abs(config.ref_ratio - ratio) < tol:
            return LayerCalibration(voxel_size=size, achieved_ratio=ratio, converged=True, state=state)
    return LayerCalibration(voxel_size=size, achieved_ratio=ratio, converged=False, state=state)


def downsample_frames(dataset, voxel_size: float, padding: float = 0.0) -> list[PointBatch]:
    """Materialize the centroid-sampled frames at a fixed voxel size."""
    frames = []
    for frame in dataset:
        grid = grid_from_batch(frame, voxel_size, padding)
        frames.append(centroid_sample(frame, intra_voxel_query(frame, grid)))
    if not frames:
        raise EmptyDataset("no frames to downsample")
    return frames


def calibrate_cascade(dataset, per_layer_configs, chain_v0: bool = True) -> CalibrationResult:
    """Calibrate a stack of layers sequentially.

    Layer 1 calibrates against the raw frames; each subsequent layer
    calibrates against the centroid-sampled output of the previous layer at
    its frozen size. Controller state restarts per layer. With chain_v0
    (default) every layer past the first starts from the previous layer's
    calibrated size instead of its own v0: the search then starts near a
    ratio of 1 and climbs briefly, which keeps the error integral small and
    avoids overshoot from windup.
    """
    configs = list(per_layer_configs)
    if not configs:
        raise ValueError("at least one layer config required")
    frames = dataset
    layers = []
    for config in configs:
        if chain_v0 and layers:
            config = replace(config, v0=max(config.v0, layers[-1].voxel_size))
        result = calibrate_layer(frames, config)
        layers.append(result)
        frames = downsample_frames(frames, result.voxel_size, config.padding)
    return CalibrationResult(layers=tuple(layers))


def write_schedule(path, result: CalibrationResult) -> None:
    """One line per layer: `layer_index voxel_size achieved_ratio converged`."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i, layer in enumerate(result.layers):
            flag = "true" if layer.converged else "false"
            fh.write(f"{i} {layer.voxel_size:.9g} {layer.achieved_ratio:.9g} {flag}\n")


@dataclass(frozen=True)
class ScheduleEntry:
    layer_index: int
    voxel_size: float
    achieved_ratio: float
    converged: bool


def read_schedule(path) -> list[ScheduleEntry]:
    entries = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            idx, size, ratio, flag = line.split()
            entries.append(
                ScheduleEntry(
                    layer_index=int(idx),
                    voxel_size=float(size),
                    achieved_ratio=float(ratio),
                    converged=flag == "true",
                )
            )
    return entries
