import numpy as np
import pytest

from avsample import PointBatch


def random_batch(rng, n, frames=1, feature_width=0, span=1.0):
    batch_id = np.sort(rng.integers(0, frames, size=n)) if frames > 1 else np.zeros(n, dtype=np.int64)
    # keep every frame label present
    batch_id[: min(frames, n)] = np.arange(min(frames, n))
    batch_id = np.sort(batch_id)
    coords = rng.random((n, 3)) * span
    features = rng.normal(size=(n, feature_width)) if feature_width else None
    return PointBatch(batch_id=batch_id, coords=coords, features=features)


def voxel_unique_batch(rng, m, axis_cells, voxel_size=1.0, frames=1):
    """m points, each alone in its voxel of an axis_cells^3 grid."""
    total = axis_cells**3
    chosen = rng.choice(total, size=m, replace=False)
    cells = np.stack([chosen // (axis_cells**2), (chosen // axis_cells) % axis_cells, chosen % axis_cells], axis=1)
    jitter = rng.uniform(0.25, 0.75, size=(m, 3))
    coords = (cells + jitter) * voxel_size
    batch_id = np.zeros(m, dtype=np.int64) if frames == 1 else np.sort(rng.integers(0, frames, size=m))
    if frames > 1:
        batch_id[: min(frames, m)] = np.arange(min(frames, m))
        batch_id = np.sort(batch_id)
    return PointBatch(batch_id=batch_id, coords=coords)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
