import math

import numpy as np
import pytest

from avsample import grid_from_batch, make_grid, validate_batch
from avsample.errors import EmptyInput, KeySpaceOverflow, NonFiniteCoordinate, RaggedFeatures

from conftest import random_batch


class TestValidateBatch:
    def test_dense_remap(self):
        batch = validate_batch([(7, (0, 0, 0)), (7, (1, 0, 0)), (9, (2, 0, 0))])
        assert batch.batch_id.tolist() == [0, 0, 1]
        assert batch.frame_count == 2

    def test_single_point(self):
        batch = validate_batch([(0, (0, 0, 0))])
        assert batch.count == 1
        assert batch.frame_count == 1
        assert batch.features is None

    def test_nan_rejected(self):
        with pytest.raises(NonFiniteCoordinate) as err:
            validate_batch([(0, (0, 0, 0)), (0, (math.nan, 0, 0))])
        assert err.value.row == 1

    def test_inf_rejected(self):
        with pytest.raises(NonFiniteCoordinate):
            validate_batch([(0, (math.inf, 0, 0))])

    def test_empty_rejected(self):
        with pytest.raises(EmptyInput):
            validate_batch([])

    def test_ragged_features(self):
        with pytest.raises(RaggedFeatures):
            validate_batch([(0, (0, 0, 0), [1.0]), (0, (1, 0, 0), [1.0, 2.0])])
        with pytest.raises(RaggedFeatures):
            validate_batch([(0, (0, 0, 0)), (0, (1, 0, 0), [1.0])])

    def test_first_occurrence_order(self):
        batch = validate_batch([(9, (0, 0, 0)), (7, (1, 0, 0)), (9, (2, 0, 0))])
        assert batch.batch_id.tolist() == [0, 1, 0]

    def test_idempotent(self, rng):
        for _ in range(100):
            n = int(rng.integers(1, 50))
            frames = rng.integers(0, 5, size=n)
            coords = rng.normal(size=(n, 3))
            feats = rng.normal(size=(n, 2))
            once = validate_batch(zip(frames, coords, feats))
            again = validate_batch(zip(once.batch_id, once.coords, once.features))
            assert np.array_equal(once.batch_id, again.batch_id)
            assert np.array_equal(once.coords, again.coords)
            assert np.array_equal(once.features, again.features)

    def test_remap_preserves_equality_classes(self, rng):
        for _ in range(100):
            n = int(rng.integers(2, 60))
            frames = rng.integers(0, 6, size=n) * 10 + 3
            coords = rng.random((n, 3))
            batch = validate_batch(zip(frames, coords))
            for i in range(n):
                for j in range(n):
                    assert (frames[i] == frames[j]) == (batch.batch_id[i] == batch.batch_id[j])


class TestGridFromBatch:
    def test_unit_pair(self):
        batch = validate_batch([(0, (0, 0, 0)), (0, (1, 1, 1))])
        grid = grid_from_batch(batch, 0.5)
        assert grid.axis_counts.tolist() == [2, 2, 2]

    def test_degenerate_extent(self):
        batch = validate_batch([(0, (3.5, -1.0, 2.0))])
        grid = grid_from_batch(batch, 1.0)
        assert grid.axis_counts.tolist() == [1, 1, 1]

    def test_uniform_cube_counts_match_scan(self, rng):
        coords = rng.random((10_000, 3))
        batch = validate_batch(zip(np.zeros(len(coords), dtype=int), coords))
        grid = grid_from_batch(batch, 0.1)
        # independent extrema scan
        lo = coords.min(axis=0)
        hi = coords.max(axis=0)
        expected = [math.ceil((hi[a] - lo[a]) / 0.1) for a in range(3)]
        assert grid.axis_counts.tolist() == expected == [10, 10, 10]
        assert np.allclose(grid.min_r, lo) and np.allclose(grid.max_r, hi)

    def test_padding_expands_bounds(self):
        batch = validate_batch([(0, (0, 0, 0)), (0, (1, 1, 1))])
        grid = grid_from_batch(batch, 0.5, padding=0.25)
        assert np.allclose(grid.min_r, -0.25)
        assert np.allclose(grid.max_r, 1.25)
        assert grid.axis_counts.tolist() == [3, 3, 3]

    def test_points_inside_bounds(self, rng):
        for _ in range(100):
            batch = random_batch(rng, int(rng.integers(1, 200)), span=float(rng.uniform(0.1, 50)))
            grid = grid_from_batch(batch, float(rng.uniform(0.05, 2.0)))
            assert (batch.coords >= grid.min_r).all()
            assert (batch.coords <= grid.max_r).all()

    def test_key_space_overflow(self):
        batch = validate_batch([(0, (0, 0, 0)), (0, (1e6, 1e6, 1e6))])
        with pytest.raises(KeySpaceOverflow):
            grid_from_batch(batch, 1e-5)

    def test_invalid_args(self):
        batch = validate_batch([(0, (0, 0, 0))])
        with pytest.raises(ValueError):
            grid_from_batch(batch, 0.0)
        with pytest.raises(ValueError):
            grid_from_batch(batch, 1.0, padding=-1)
        with pytest.raises(ValueError):
            make_grid((0, 0, 0), (-1, 1, 1), 1.0, 1)
