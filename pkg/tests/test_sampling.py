import numpy as np
import pytest

from avsample import (
    PointBatch,
    SampledLayer,
    centroid_sample,
    grid_from_batch,
    inter_aggregate,
    inter_voxel_query,
    intra_aggregate,
    intra_voxel_query,
    linear_transform,
    make_grid,
    run_cascade,
    voxel_coords_3d,
)
from avsample.errors import TransformRowCountMismatch

from conftest import random_batch, voxel_unique_batch
from test_query import batch_at


def grouped(batch, voxel_size):
    grid = grid_from_batch(batch, voxel_size)
    asn = intra_voxel_query(batch, grid)
    return grid, asn


class TestCentroidSample:
    def test_pair_mean(self):
        batch = batch_at([(0.2, 0, 0), (0.4, 0, 0)])
        grid = make_grid((0, 0, 0), (1, 1, 1), 1.0, 1)
        out = centroid_sample(batch, intra_voxel_query(batch, grid))
        np.testing.assert_allclose(out.coords, [[0.3, 0.0, 0.0]])

    def test_singleton_voxels_identity(self, rng):
        batch = voxel_unique_batch(rng, 50, 10)
        grid = make_grid((0, 0, 0), (10, 10, 10), 1.0, 1)
        asn = intra_voxel_query(batch, grid)
        out = centroid_sample(batch, asn)
        # identical point set, reordered by key rank
        np.testing.assert_allclose(out.coords, batch.coords[np.argsort(asn.key, kind="stable")])

    def test_matches_per_group_average(self, rng):
        for _ in range(100):
            batch = random_batch(rng, int(rng.integers(2, 1000)))
            grid, asn = grouped(batch, 0.25)
            out = centroid_sample(batch, asn)
            for g in range(asn.group_count):
                members = batch.coords[asn.group_id == g]
                np.testing.assert_allclose(out.coords[g], members.mean(axis=0), rtol=1e-12, atol=1e-12)

    def test_centroid_in_own_voxel(self, rng):
        # compare against the group key rather than re-flooring coordinates,
        # which would flake at cell boundaries
        from avsample import flatten_3d_to_1d

        for _ in range(100):
            batch = random_batch(rng, int(rng.integers(2, 500)), frames=int(rng.integers(1, 3)))
            grid, asn = grouped(batch, float(rng.uniform(0.1, 0.5)))
            out = centroid_sample(batch, asn)
            keys = flatten_3d_to_1d(voxel_coords_3d(out, grid), grid)
            np.testing.assert_array_equal(keys, np.unique(asn.key))

    def test_frame_labels_preserved(self, rng):
        batch = random_batch(rng, 200, frames=3)
        grid, asn = grouped(batch, 0.3)
        out = centroid_sample(batch, asn)
        frame_of_group = np.empty(asn.group_count, dtype=np.int64)
        frame_of_group[asn.group_id] = batch.batch_id
        np.testing.assert_array_equal(out.batch_id, frame_of_group)


class TestIntraAggregate:
    def test_single_group_max(self):
        batch = PointBatch(
            batch_id=[0, 0],
            coords=[(0.2, 0.5, 0.5), (0.8, 0.5, 0.5)],
            features=[[1.0], [5.0]],
        )
        grid = make_grid((0, 0, 0), (1, 1, 1), 1.0, 1)
        asn = intra_voxel_query(batch, grid)
        cent = centroid_sample(batch, asn)
        out = intra_aggregate(batch, asn, cent)
        # columns: feature max, then per-axis max of offsets from the centroid
        np.testing.assert_allclose(out, [[5.0, 0.3, 0.0, 0.0]])

    def test_singleton_groups_zero_offsets(self, rng):
        batch = voxel_unique_batch(rng, 40, 8)
        feats = rng.normal(size=(40, 3))
        batch = PointBatch(batch_id=batch.batch_id, coords=batch.coords, features=feats)
        grid = make_grid((0, 0, 0), (8, 8, 8), 1.0, 1)
        asn = intra_voxel_query(batch, grid)
        cent = centroid_sample(batch, asn)
        out = intra_aggregate(batch, asn, cent)
        order = np.argsort(asn.key, kind="stable")
        np.testing.assert_allclose(out[:, :3], feats[order])
        np.testing.assert_allclose(out[:, 3:], 0.0, atol=1e-12)

    def test_matches_loop_oracle(self, rng):
        w = rng.normal(size=(7, 4))
        for _ in range(50):
            batch = random_batch(rng, int(rng.integers(2, 400)), feature_width=4)
            grid, asn = grouped(batch, 0.3)
            cent = centroid_sample(batch, asn)
            out = intra_aggregate(batch, asn, cent, transform=linear_transform(w))
            # explicit per-group loop
            rows = np.hstack([batch.features, batch.coords - cent.coords[asn.group_id]]) @ w
            for g in range(asn.group_count):
                np.testing.assert_allclose(out[g], rows[asn.group_id == g].max(axis=0), rtol=1e-12)

    def test_coords_substituted_when_no_features(self, rng):
        batch = random_batch(rng, 100)
        grid, asn = grouped(batch, 0.3)
        cent = centroid_sample(batch, asn)
        out = intra_aggregate(batch, asn, cent)
        assert out.shape == (asn.group_count, 6)
        ones = intra_aggregate(batch, asn, cent, missing_features="ones")
        assert ones.shape == (asn.group_count, 4)
        np.testing.assert_array_equal(ones[:, 0], 1.0)

    def test_row_count_mismatch(self, rng):
        batch = random_batch(rng, 50, feature_width=2)
        grid, asn = grouped(batch, 0.3)
        cent = centroid_sample(batch, asn)
        with pytest.raises(TransformRowCountMismatch):
            intra_aggregate(batch, asn, cent, transform=lambda x: x[:-1])


def build_layer(rng, m=60, cells=8, width=3):
    sampled = voxel_unique_batch(rng, m, cells)
    grid = make_grid((0, 0, 0), (cells, cells, cells), 1.0, 1)
    asn = intra_voxel_query(sampled, grid)
    points = centroid_sample(sampled, asn)
    features = rng.normal(size=(m, width))
    return SampledLayer(points=points, features=features, assignment=asn, grid=grid)


class TestInterAggregate:
    def test_isolated_voxel(self, rng):
        layer = build_layer(rng, m=1, cells=9)
        table = inter_voxel_query(layer.points, layer.grid, 3)
        out = inter_aggregate(layer, table)
        np.testing.assert_allclose(out, np.hstack([layer.features, np.zeros((1, 3))]))

    def test_zero_features_stay_zero(self, rng):
        layer = build_layer(rng, m=40)
        layer = SampledLayer(
            points=layer.points,
            features=np.zeros((40, 2)),
            assignment=layer.assignment,
            grid=layer.grid,
        )
        table = inter_voxel_query(layer.points, layer.grid, 3)
        w = np.vstack([rng.normal(size=(2, 3)), np.zeros((3, 3))])
        out = inter_aggregate(layer, table, transform=linear_transform(w))
        np.testing.assert_allclose(out, 0.0, atol=1e-12)

    def test_nbr_size_one_is_self_transform(self, rng):
        layer = build_layer(rng, m=50)
        table = inter_voxel_query(layer.points, layer.grid, 1)
        out = inter_aggregate(layer, table)
        np.testing.assert_allclose(out, np.hstack([layer.features, np.zeros((50, 3))]))

    def test_matches_per_center_summation(self, rng):
        w = rng.normal(size=(6, 2))
        for _ in range(20):
            layer = build_layer(rng, m=int(rng.integers(2, 500)), cells=10)
            table = inter_voxel_query(layer.points, layer.grid, 3)
            out = inter_aggregate(layer, table, transform=linear_transform(w))
            m = layer.points.count
            want = np.zeros((m, 2))
            for center, nbr in zip(table.inter_gid, table.nbr_indices):
                row = np.concatenate(
                    [layer.features[nbr], layer.points.coords[nbr] - layer.points.coords[center]]
                )
                want[center] += row @ w
            np.testing.assert_allclose(out, want, rtol=1e-10, atol=1e-10)


class TestCascade:
    def test_counts_non_increasing(self, rng):
        batch = random_batch(rng, 3000, frames=2)
        layers = run_cascade(batch, [0.05, 0.1, 0.2])
        counts = [batch.count] + [layer.points.count for layer in layers]
        assert all(a >= b for a, b in zip(counts, counts[1:]))

    def test_arbitrary_ratio_sizes(self, rng):
        # centimeter-scale stack with non-integer consecutive ratios
        batch = random_batch(rng, 4000, span=1.0)
        sizes = [0.0507, 0.0754, 0.1058, 0.1458]
        layers = run_cascade(batch, sizes)
        counts = [batch.count] + [layer.points.count for layer in layers]
        assert all(a > b for a, b in zip(counts, counts[1:]))
        assert len(layers) == 4
        for layer, size in zip(layers, sizes):
            assert layer.grid.voxel_size == size

    def test_single_layer_matches_direct_composition(self, rng):
        batch = random_batch(rng, 500, feature_width=2)
        layers = run_cascade(batch, [0.2], nbr_size=3)
        grid = grid_from_batch(batch, 0.2)
        asn = intra_voxel_query(batch, grid)
        cent = centroid_sample(batch, asn)
        pooled = intra_aggregate(batch, asn, cent)
        stage = SampledLayer(points=cent, features=pooled, assignment=asn, grid=grid)
        table = inter_voxel_query(cent, grid, 3)
        fused = inter_aggregate(stage, table)
        np.testing.assert_array_equal(layers[0].points.coords, cent.coords)
        np.testing.assert_array_equal(layers[0].features, fused)

    def test_permutation_invariance(self, rng):
        batch = random_batch(rng, 800)
        perm = rng.permutation(800)
        shuffled = PointBatch(batch_id=batch.batch_id[perm], coords=batch.coords[perm])
        a = run_cascade(batch, [0.1, 0.2])
        b = run_cascade(shuffled, [0.1, 0.2])
        for la, lb in zip(a, b):
            # same voxels in the same rank order; means may differ by
            # accumulation order, so compare with tolerance
            np.testing.assert_array_equal(np.unique(la.assignment.key), np.unique(lb.assignment.key))
            np.testing.assert_allclose(la.points.coords, lb.points.coords, rtol=1e-9, atol=1e-12)

    def test_bad_sizes_rejected(self, rng):
        batch = random_batch(rng, 10)
        with pytest.raises(ValueError):
            run_cascade(batch, [])
        with pytest.raises(ValueError):
            run_cascade(batch, [0.1, -0.2])
