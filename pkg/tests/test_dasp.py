import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import ndimage

from freespace import dasp
from freespace.errors import DegenerateInput, NoSeeds, SamplingExhausted
from freespace.types import DaspParams, DepthMap, DensityMap, RgbImage

from conftest import ramp_depth, random_rgb


# ---------------------------------------------------------------- repair

def test_repair_valid_input_is_same_object():
    d = DepthMap(np.ones((6, 6), np.float32))
    assert dasp.repair_depth(d) is d


def test_repair_single_hole_uses_local_median():
    z = np.arange(49, dtype=np.float32).reshape(7, 7) + 1.0
    z[3, 3] = np.nan
    # oracle: median of the valid 5x5 neighborhood
    win = (np.arange(49, dtype=np.float64).reshape(7, 7) + 1.0)[1:6, 1:6]
    expect = np.median(np.delete(win.ravel(), 12))
    out = dasp.repair_depth(DepthMap(z))
    assert out.data[3, 3] == np.float32(expect)
    assert np.isfinite(out.data).all()


def test_repair_wide_hole_grows_window():
    z = np.full((11, 11), 2.0, np.float32)
    z[3:8, 3:8] = np.nan  # 5x5 hole; its center sees no valid pixel at 5x5
    out = dasp.repair_depth(DepthMap(z))
    assert out.data[5, 5] == 2.0
    assert np.isfinite(out.data).all()


def test_repair_huge_hole_falls_back_to_global_median():
    z = np.full((30, 30), np.nan, np.float32)
    z[0, 0] = 1.0
    z[0, 1] = 3.0
    out = dasp.repair_depth(DepthMap(z))
    assert out.data[15, 15] == np.float32(2.0)


def test_repair_treats_nonpositive_as_invalid():
    z = np.full((6, 6), 1.5, np.float32)
    z[2, 2] = -1.0
    z[3, 3] = 0.0
    out = dasp.repair_depth(DepthMap(z))
    assert out.data[2, 2] == 1.5 and out.data[3, 3] == 1.5


def test_repair_all_invalid_raises():
    with pytest.raises(DegenerateInput):
        dasp.repair_depth(DepthMap(np.full((4, 4), np.nan, np.float32)))


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_repair_output_always_valid(seed):
    rng = np.random.default_rng(seed)
    z = rng.uniform(0.5, 5.0, size=(12, 12)).astype(np.float32)
    holes = rng.random((12, 12)) < 0.3
    z[holes] = np.nan
    if holes.all():
        return
    out = dasp.repair_depth(DepthMap(z)).data
    assert np.isfinite(out).all() and (out > 0).all()


# ---------------------------------------------------------------- density

def _params(**kw):
    return dataclasses.replace(DaspParams(), **kw)


def test_density_two_band_ratio_is_exactly_four():
    z = np.ones((10, 20), np.float32)
    z[:, 10:] = 2.0
    rho = dasp.compute_density(DepthMap(z), _params()).rho
    assert rho[0, 0] / rho[0, 19] == 4.0


def test_density_sums_to_target():
    z = ramp_depth(40, 50)
    p = _params(target_superpixels=123)
    rho = dasp.compute_density(DepthMap(z), p)
    np.testing.assert_allclose(rho.rho.sum(), 123.0, rtol=1e-9)
    assert rho.target_count == 123


def test_density_zero_exponent_is_uniform():
    z = ramp_depth(8, 8)
    rho = dasp.compute_density(DepthMap(z), _params(density_exponent=0.0)).rho
    np.testing.assert_allclose(rho, rho[0, 0])


def test_density_decreases_with_depth():
    z = ramp_depth(30, 30, near=1.0, far=5.0)
    rho = dasp.compute_density(DepthMap(z), _params()).rho
    assert rho[-1, 0] > rho[0, 0]  # deepest row is the top row


# ---------------------------------------------------------------- sampling

def _sample_fixture(seed, h=60, w=80, n=120):
    rng = np.random.default_rng(seed)
    z = ndimage.gaussian_filter(rng.uniform(1.0, 4.0, (h, w)), 6)
    d = DepthMap(z.astype(np.float32))
    p = _params(target_superpixels=n)
    rho = dasp.compute_density(d, p)
    img = RgbImage(random_rgb(rng, h, w))
    return rho, img, d


def test_poisson_pairwise_bound_brute_force():
    for seed in (0, 1, 2):
        rho, img, d = _sample_fixture(seed)
        centers = dasp.poisson_disc_sample(rho, seed, img, d)
        assert 2 <= len(centers) <= rho.target_count
        xy = np.array([(c.x, c.y) for c in centers])
        rr = np.array([c.radius for c in centers])
        for i in range(len(centers)):
            for j in range(i + 1, len(centers)):
                dist = np.hypot(*(xy[i] - xy[j]))
                assert dist >= 0.8 * min(rr[i], rr[j]) - 1e-9


def test_poisson_center_fields_come_from_pixel_under_dart():
    rho, img, d = _sample_fixture(3)
    centers = dasp.poisson_disc_sample(rho, 3, img, d)
    for c in centers[:20]:
        col, row = int(c.x), int(c.y)
        np.testing.assert_array_equal(c.color, img.data[row, col].astype(np.float64))
        assert c.depth == float(d.data[row, col])
        expect_r = 1.0 / np.sqrt(rho.rho[row, col] * np.pi)
        np.testing.assert_allclose(c.radius, expect_r, rtol=1e-12)


def test_poisson_determinism():
    rho, img, d = _sample_fixture(4)
    a = dasp.poisson_disc_sample(rho, 9, img, d)
    b = dasp.poisson_disc_sample(rho, 9, img, d)
    c = dasp.poisson_disc_sample(rho, 10, img, d)
    assert [(p.x, p.y) for p in a] == [(p.x, p.y) for p in b]
    assert [(p.x, p.y) for p in a] != [(p.x, p.y) for p in c]


def test_poisson_exhaustion_raises():
    rho = DensityMap(np.full((1, 1), 400.0), 400)
    with pytest.raises(SamplingExhausted):
        dasp.poisson_disc_sample(rho, 0)


def test_deep_band_gets_fewer_centers():
    # acceptance-law sanity at unit scale: deep half emits fewer superpixels
    z = np.ones((40, 80), np.float32)
    z[:, 40:] = 2.0
    d = DepthMap(z)
    p = _params(target_superpixels=150)
    rho = dasp.compute_density(d, p)
    ratios = []
    for seed in range(5):
        centers = dasp.poisson_disc_sample(rho, seed)
        deep = sum(c.x >= 40 for c in centers)
        ratios.append(deep / max(len(centers) - deep, 1))
    assert np.mean(ratios) < 1.0


# ---------------------------------------------------------------- iteration

def _cluster_fixture(seed, h=50, w=70, n=60):
    rho, img, d = _sample_fixture(seed, h, w, n)
    centers = dasp.poisson_disc_sample(rho, seed, img, d)
    return img, d, centers


def test_iterate_is_partition_with_connected_labels():
    img, d, centers = _cluster_fixture(0)
    sp = dasp.iterate_clusters(img, d, centers, _params())
    assert sp.labels.shape == d.data.shape
    assert sp.labels.min() == 0 and sp.labels.max() == sp.count - 1
    counts = np.bincount(sp.labels.ravel(), minlength=sp.count)
    assert (counts > 0).all()
    for lab in range(sp.count):
        _, ncc = ndimage.label(sp.labels == lab)
        assert ncc == 1


def test_iterate_objective_non_increasing():
    for seed in (0, 1, 5):
        img, d, centers = _cluster_fixture(seed)
        _, trace = dasp.iterate_clusters(img, d, centers, _params(), return_trace=True)
        diffs = np.diff(trace)
        assert (diffs <= 1e-9).all(), trace


def test_iterate_deterministic():
    img, d, centers = _cluster_fixture(2)
    a = dasp.iterate_clusters(img, d, centers, _params())
    b = dasp.iterate_clusters(img, d, centers, _params())
    np.testing.assert_array_equal(a.labels, b.labels)


def test_iterate_needs_two_centers():
    img, d, centers = _cluster_fixture(3)
    with pytest.raises(SamplingExhausted):
        dasp.iterate_clusters(img, d, centers[:1], _params())


# ---------------------------------------------------------------- connectivity

def test_connectivity_merges_stray_fragment():
    raw = np.array(
        [[0, 0, 1, 1],
         [0, 1, 1, 1],
         [1, 1, 1, 0]], np.int32)
    sp = dasp._enforce_connectivity_raw(raw)
    expect = np.array(
        [[0, 0, 1, 1],
         [0, 1, 1, 1],
         [1, 1, 1, 1]], np.int32)
    np.testing.assert_array_equal(sp.labels, expect)
    assert sp.count == 2


def test_connectivity_keeper_is_largest_component():
    raw = np.array(
        [[0, 0, 0],
         [1, 2, 1],
         [0, 0, 0]], np.int32)
    # label 1 splits into two 1-px comps; the first in raster order is kept,
    # the other merges into its only larger neighbor by boundary share
    sp = dasp._enforce_connectivity_raw(raw)
    expect = np.array(
        [[0, 0, 0],
         [1, 2, 0],
         [0, 0, 0]], np.int32)
    np.testing.assert_array_equal(sp.labels, expect)


def test_connectivity_single_component_label_is_kept():
    raw = np.array(
        [[2, 2, 30],
         [2, 1, 0],
         [2, 2, 0]], np.int32)
    # 30 is connected (one component), so it stays a region of its own
    sp = dasp._enforce_connectivity_raw(raw)
    expect = np.array(
        [[2, 2, 3],
         [2, 1, 0],
         [2, 2, 0]], np.int32)
    np.testing.assert_array_equal(sp.labels, expect)
    assert sp.count == 4


def test_connectivity_tie_goes_to_lowest_label():
    raw = np.array(
        [[0, 0, 2, 2],
         [1, 1, 2, 2],
         [1, 1, 1, 0]], np.int32)
    # label 0 keeps its 2-px component; the corner fragment at (2,3) borders
    # labels 1 and 2 one edge each, so the tie resolves to label 1
    sp = dasp._enforce_connectivity_raw(raw)
    expect = np.array(
        [[0, 0, 2, 2],
         [1, 1, 2, 2],
         [1, 1, 1, 1]], np.int32)
    np.testing.assert_array_equal(sp.labels, expect)


def test_connectivity_compacts_labels():
    raw = np.array([[5, 5], [9, 9]], np.int32)
    sp = dasp._enforce_connectivity_raw(raw)
    np.testing.assert_array_equal(sp.labels, [[0, 0], [1, 1]])
    assert sp.count == 2


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_connectivity_invariants_random(seed):
    rng = np.random.default_rng(seed)
    raw = rng.integers(0, 4, size=(9, 12)).astype(np.int32)
    sp = dasp._enforce_connectivity_raw(raw)
    assert sp.labels.min() == 0 and sp.labels.max() == sp.count - 1
    for lab in range(sp.count):
        _, ncc = ndimage.label(sp.labels == lab)
        assert ncc == 1
    again = dasp.enforce_connectivity(sp)
    np.testing.assert_array_equal(again.labels, sp.labels)


# ---------------------------------------------------------------- seeds

def test_seed_on_two_band_plateau_closed_form():
    z = np.ones((20, 20), np.float32)
    z[:, 10:] = 4.0
    seeds = dasp.extract_seeds(DepthMap(z), _params())
    assert len(seeds.seeds) == 1
    s = seeds.seeds[0]
    # Sobel leaves columns 9-10 with nonzero gradient, p80 keeps the deep
    # half, so the candidate block is rows 0..19 x cols 11..19
    assert (s.x, s.y, s.score) == (15.0, 9.5, 4.0)


def test_seed_ordering_and_top_k():
    z = np.ones((30, 30), np.float32)
    z[2:12, 2:12] = 3.5
    z[18:28, 18:28] = 4.0
    seeds = dasp.extract_seeds(
        DepthMap(z), _params(seed_depth_pct=70.0, seed_top_k=2)).seeds
    assert len(seeds) == 2
    assert seeds[0].score > seeds[1].score
    assert seeds[0].x > 15 and seeds[1].x < 15


def test_seed_min_area_filter():
    z = np.ones((20, 20), np.float32)
    z[2:14, 2:14] = 4.0  # zero-gradient interior is 10x10 = 100 px
    z[16:19, 16:19] = 4.0  # zero-gradient interior is a single pixel
    # 153/400 deep pixels, so the 80th depth percentile is 4.0; candidates
    # are the two plateau interiors and min_area = 4 px drops the small one
    seeds = dasp.extract_seeds(DepthMap(z), _params(seed_min_area=0.01)).seeds
    assert len(seeds) == 1
    assert (seeds[0].x, seeds[0].y, seeds[0].score) == (7.5, 7.5, 4.0)


def test_seed_constant_map_degenerates_to_whole_image():
    z = np.full((16, 16), 2.0, np.float32)
    seeds = dasp.extract_seeds(DepthMap(z), _params()).seeds
    assert len(seeds) == 1
    assert (seeds[0].x, seeds[0].y) == (7.5, 7.5)


def test_seed_none_when_deep_pixels_are_all_edges():
    z = np.ones((20, 20), np.float32)
    z[:, 10:] = np.arange(10.0, 20.0, dtype=np.float32)
    # the deep half is a ramp, so every pixel there has nonzero gradient;
    # the flat half (45% of pixels) pins the gradient threshold at zero
    with pytest.raises(NoSeeds):
        dasp.extract_seeds(DepthMap(z), _params())


def test_deepest_pixel_seed_raster_first():
    z = np.zeros((5, 5), np.float32) + 1.0
    z[2, 3] = 9.0
    z[3, 1] = 9.0
    s = dasp.deepest_pixel_seed(DepthMap(z)).seeds
    assert len(s) == 1 and (s[0].x, s[0].y, s[0].score) == (3.0, 2.0, 9.0)
