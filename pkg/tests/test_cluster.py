"""Attraction weighting, center init, Lloyd iterations, cluster selection."""

import math

import numpy as np
import pytest

from freespace import cluster
from freespace.errors import DegenerateWeights, DimensionMismatch, TooFewDescriptors
from freespace.types import (
    ClusterAssignment,
    ClusterParams,
    Seed,
    SeedSet,
    SuperpixelDescriptor,
    SuperpixelMap,
)


def _desc(label, feature, centroid=(0.0, 0.0), depth=1.0, area=10):
    return SuperpixelDescriptor(
        label=label, feature=np.asarray(feature, np.float64),
        centroid=centroid, mean_depth=depth, area=area)


def _blob_descs(rng, n0=8, n1=8, sep=5.0):
    """Two well-separated feature blobs."""
    descs = []
    for i in range(n0):
        descs.append(_desc(i, rng.normal(0, 0.1, 4), depth=1.0 + 0.01 * i))
    for i in range(n1):
        descs.append(_desc(n0 + i, rng.normal(sep, 0.1, 4), depth=2.0))
    return descs


# ------------------------------------------------------------ attraction

def test_attraction_closed_form_two_seeds():
    descs = [
        _desc(0, [0.0], centroid=(0.0, 0.0), depth=1.0),
        _desc(1, [0.0], centroid=(30.0, 40.0), depth=2.0),
        _desc(2, [0.0], centroid=(100.0, 0.0), depth=3.0),
    ]
    seeds = SeedSet((Seed(0.0, 0.0, 3.0), Seed(100.0, 0.0, 2.5)))
    sigma, diag = 0.2, 200.0
    w = cluster.attraction_weights(descs, seeds, sigma, diag)
    zhat = np.array([0.0, 0.5, 1.0])
    d2 = np.array([0.0, 30.0**2 + 40.0**2, 0.0])  # nearest of the two seeds
    want = zhat * np.exp(-d2 / (2 * (sigma * diag) ** 2))
    np.testing.assert_allclose(w, want, rtol=1e-12)


def test_attraction_constant_positive_depth_gives_pure_distance_decay():
    descs = [
        _desc(0, [0.0], centroid=(10.0, 10.0), depth=2.0),
        _desc(1, [0.0], centroid=(50.0, 10.0), depth=2.0),
    ]
    seeds = SeedSet((Seed(10.0, 10.0, 2.0),))
    w = cluster.attraction_weights(descs, seeds, 0.15, 100.0)
    assert w[0] == 1.0
    assert w[1] == pytest.approx(math.exp(-(40.0**2) / (2 * 15.0**2)))


def test_attraction_zero_depth_degenerate():
    descs = [_desc(0, [0.0], depth=0.0), _desc(1, [0.0], depth=0.0)]
    seeds = SeedSet((Seed(0.0, 0.0, 1.0),))
    with pytest.raises(DegenerateWeights):
        cluster.attraction_weights(descs, seeds, 0.15, 100.0)


def test_attraction_uses_nearest_seed():
    descs = [_desc(0, [0.0], centroid=(49.0, 0.0), depth=1.0),
             _desc(1, [0.0], centroid=(0.0, 0.0), depth=2.0)]
    seeds = SeedSet((Seed(45.0, 0.0, 5.0), Seed(200.0, 0.0, 4.0)))
    w = cluster.attraction_weights(descs, seeds, 0.15, 100.0)
    # descriptor 0 is 4 px from the first seed, 151 from the second
    assert w[0] == pytest.approx(0.0 * math.exp(-16 / (2 * 15.0**2)))
    assert w[1] == pytest.approx(1.0 * math.exp(-(45.0**2) / (2 * 15.0**2)))


# ------------------------------------------------------------------ init

def test_init_center0_is_weighted_feature_mean():
    descs = [
        _desc(0, [1.0, 0.0], depth=1.0),
        _desc(1, [0.0, 1.0], depth=2.0),
        _desc(2, [1.0, 1.0], depth=3.0),
    ]
    w = np.array([0.5, 0.25, 0.25])
    cen = cluster.init_centers(descs, w, k=2, rng_seed=0)
    np.testing.assert_allclose(
        cen[0], (0.5 * np.array([1.0, 0.0]) + 0.25 * np.array([0.0, 1.0])
                 + 0.25 * np.array([1.0, 1.0])))


def test_init_fully_attracted_descriptors_are_never_drawn():
    # weight 1 descriptors carry zero repulsion mass, so every repelled
    # center must come from descriptor 2, whatever the rng says
    descs = [
        _desc(0, [0.0, 0.0]),
        _desc(1, [0.1, 0.0]),
        _desc(2, [5.0, 5.0]),
    ]
    w = np.array([1.0, 1.0, 0.0])
    for seed in range(20):
        cen = cluster.init_centers(descs, w, k=2, rng_seed=seed)
        np.testing.assert_array_equal(cen[1], [5.0, 5.0])


def test_init_deterministic_per_seed():
    rng = np.random.default_rng(21)
    descs = _blob_descs(rng)
    w = np.linspace(0.1, 0.9, len(descs))
    a = cluster.init_centers(descs, w, k=3, rng_seed=7)
    b = cluster.init_centers(descs, w, k=3, rng_seed=7)
    np.testing.assert_array_equal(a, b)


def test_init_too_few_descriptors():
    descs = [_desc(0, [0.0]), _desc(1, [1.0])]
    with pytest.raises(TooFewDescriptors):
        cluster.init_centers(descs, np.array([0.5, 0.5]), k=3, rng_seed=0)


def test_repulsion_law_fallbacks():
    minsq = np.array([1.0, 3.0])
    p = cluster.repulsion_law(np.ones(2), minsq)  # zero repulsion mass
    np.testing.assert_allclose(p, minsq / minsq.sum())
    p = cluster.repulsion_law(np.ones(2), np.zeros(2))  # all coincide
    np.testing.assert_allclose(p, [0.5, 0.5])
    p = cluster.repulsion_law(np.array([0.25, 0.25]), minsq)
    np.testing.assert_allclose(p, 0.75 * minsq / (0.75 * minsq.sum()))


# ---------------------------------------------------------------- kmeans

def test_kmeans_separates_two_blobs():
    rng = np.random.default_rng(22)
    descs = _blob_descs(rng)
    w = cluster.attraction_weights(
        descs, SeedSet((Seed(0.0, 0.0, 1.0),)), 0.15, 100.0)
    cen = cluster.init_centers(descs, w, k=2, rng_seed=0)
    assign = cluster.kmeans(descs, cen, ClusterParams(k=2))
    lab = assign.labels
    assert len(set(lab[:8])) == 1 and len(set(lab[8:])) == 1
    assert lab[0] != lab[8]


def test_kmeans_objective_trace_non_increasing():
    for fixture_seed in range(10):
        rng = np.random.default_rng(100 + fixture_seed)
        descs = [
            _desc(i, rng.normal(size=6), depth=rng.uniform(0.5, 3.0))
            for i in range(30)
        ]
        cen0 = np.stack([descs[i].feature for i in (0, 10, 20)])
        _, trace = cluster.kmeans(
            descs, cen0, ClusterParams(k=3), return_trace=True)
        diffs = np.diff(np.asarray(trace))
        assert (diffs <= 1e-9).all(), f"fixture {fixture_seed}: {trace}"


def test_kmeans_final_labels_are_a_fixed_point():
    rng = np.random.default_rng(23)
    descs = _blob_descs(rng, 10, 10)
    cen0 = np.stack([descs[0].feature, descs[10].feature])
    assign = cluster.kmeans(descs, cen0, ClusterParams(k=2))
    feats = np.stack([d.feature for d in descs])
    d2 = ((feats[:, None, :] - assign.centers[None]) ** 2).sum(axis=2)
    np.testing.assert_array_equal(np.argmin(d2, axis=1), assign.labels)


def test_kmeans_reseeds_empty_cluster():
    rng = np.random.default_rng(24)
    descs = _blob_descs(rng, 6, 6)
    far = np.full(4, 1e6)
    cen0 = np.stack([descs[0].feature, descs[6].feature, far])
    assign = cluster.kmeans(descs, cen0, ClusterParams(k=3))
    assert np.bincount(assign.labels, minlength=3).min() >= 1


def test_kmeans_deterministic_and_bounded():
    rng = np.random.default_rng(25)
    descs = _blob_descs(rng)
    cen0 = np.stack([descs[0].feature, descs[8].feature])
    p = ClusterParams(k=2, max_iter=50)
    a = cluster.kmeans(descs, cen0, p)
    b = cluster.kmeans(descs, cen0, p)
    np.testing.assert_array_equal(a.labels, b.labels)
    np.testing.assert_array_equal(a.centers, b.centers)
    assert 1 <= a.iterations_run <= 50


def test_kmeans_too_few_descriptors():
    descs = [_desc(0, [0.0, 1.0])]
    with pytest.raises(TooFewDescriptors):
        cluster.kmeans(descs, np.zeros((2, 2)), ClusterParams(k=2))


# ------------------------------------------------------------- selection

def test_select_area_weighted_mean_depth():
    descs = [
        _desc(0, [0.0], depth=3.0, area=10),   # cluster 0: (10*3 + 30*1)/40 = 1.5
        _desc(1, [0.0], depth=1.0, area=30),
        _desc(2, [0.0], depth=2.0, area=100),  # cluster 1: 2.0
    ]
    assign = ClusterAssignment(
        labels=np.array([0, 0, 1], np.int32),
        centers=np.zeros((2, 1)))
    assert cluster.select_freespace_cluster(assign, descs) == 1


def test_select_tie_goes_to_lower_index():
    descs = [_desc(0, [0.0], depth=2.0, area=5),
             _desc(1, [0.0], depth=2.0, area=50)]
    assign = ClusterAssignment(
        labels=np.array([0, 1], np.int32), centers=np.zeros((2, 1)))
    assert cluster.select_freespace_cluster(assign, descs) == 0


# --------------------------------------------------------------- raster

def test_rasterize_mask_maps_members():
    labels = np.array([[0, 0, 1], [2, 2, 1]], np.int32)
    sp = SuperpixelMap(labels, 3)
    assign = ClusterAssignment(
        labels=np.array([1, 0, 1], np.int32), centers=np.zeros((2, 1)))
    m = cluster.rasterize_mask(sp, assign, chosen=1)
    np.testing.assert_array_equal(
        m.data, [[True, True, False], [True, True, False]])


def test_rasterize_mask_dimension_mismatch():
    sp = SuperpixelMap(np.zeros((2, 2), np.int32), 1)
    assign = ClusterAssignment(
        labels=np.array([0, 1], np.int32), centers=np.zeros((2, 1)))
    with pytest.raises(DimensionMismatch):
        cluster.rasterize_mask(sp, assign, 0)
