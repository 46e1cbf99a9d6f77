"""Superpixel alignment: pool the coarse feature grid into one descriptor
per superpixel through ten deterministic anchor points and bilinear
interpolation with the half-pixel cell-center convention."""

import numpy as np

from .errors import OutOfBounds, UnknownLabel
from .types import DepthMap, FeatureGrid, SuperpixelDescriptor, SuperpixelMap

ANCHORS = 10


def select_anchors(sp: SuperpixelMap, label: int) -> list:
    """Ten member pixels at evenly spaced row-major ranks.

    Members are enumerated in row-major order; anchor j sits at index
    floor(j*(n-1)/9), so small superpixels repeat pixels and a 10-pixel
    superpixel returns exactly its members.
    """
    if not 0 <= label < sp.count:
        raise UnknownLabel(f"label {label} outside [0, {sp.count})")
    ys, xs = np.nonzero(sp.labels == label)
    n = xs.size
    idx = (np.arange(ANCHORS) * (n - 1)) // 9
    return [(int(xs[i]), int(ys[i])) for i in idx]


def bilinear_sample(grid: FeatureGrid, x: float, y: float,
                    img_w: int, img_h: int) -> np.ndarray:
    """Sample the grid at continuous image coordinates.

    Image coords map to grid coords u = (x+0.5)*grid_w/img_w - 0.5 (cell
    centers at integers), then the four surrounding cells blend bilinearly;
    indices clamp at the border (edge replication). A query exactly on a
    cell center returns that cell's vector unchanged.
    """
    if not (0 <= x < img_w and 0 <= y < img_h):
        raise OutOfBounds(f"query ({x}, {y}) outside {img_w}x{img_h}")
    out = _bilinear_batch(
        grid, np.asarray([x], np.float64), np.asarray([y], np.float64), img_w, img_h
    )
    return out[0]


def _bilinear_batch(grid: FeatureGrid, xs, ys, img_w, img_h) -> np.ndarray:
    data = grid.data.astype(np.float64)
    gh, gw = grid.grid_h, grid.grid_w
    u = (xs + 0.5) * (gw / img_w) - 0.5
    v = (ys + 0.5) * (gh / img_h) - 0.5
    u0 = np.floor(u)
    v0 = np.floor(v)
    fu = u - u0
    fv = v - v0
    iu0 = np.clip(u0.astype(np.int64), 0, gw - 1)
    iu1 = np.clip(u0.astype(np.int64) + 1, 0, gw - 1)
    iv0 = np.clip(v0.astype(np.int64), 0, gh - 1)
    iv1 = np.clip(v0.astype(np.int64) + 1, 0, gh - 1)
    fu = fu[:, None]
    fv = fv[:, None]
    top = (1.0 - fu) * data[iv0, iu0] + fu * data[iv0, iu1]
    bot = (1.0 - fu) * data[iv1, iu0] + fu * data[iv1, iu1]
    return (1.0 - fv) * top + fv * bot


def pool_superpixels(sp: SuperpixelMap, grid: FeatureGrid, d: DepthMap) -> list:
    """One descriptor per superpixel, ordered by label.

    feature = mean of the ten anchor samples; centroid/mean depth/area are
    plain member statistics.
    """
    h, w = sp.labels.shape
    flat = sp.labels.ravel()
    n_sp = sp.count
    order = np.argsort(flat, kind="stable")  # row-major within each label
    sorted_lab = flat[order]
    bounds = np.searchsorted(sorted_lab, np.arange(n_sp + 1))

    anchor_flat = np.empty(n_sp * ANCHORS, np.int64)
    ranks = np.arange(ANCHORS)
    for lab in range(n_sp):
        members = order[bounds[lab]:bounds[lab + 1]]
        n = members.size
        anchor_flat[lab * ANCHORS:(lab + 1) * ANCHORS] = members[(ranks * (n - 1)) // 9]
    ax = (anchor_flat % w).astype(np.float64)
    ay = (anchor_flat // w).astype(np.float64)
    samples = _bilinear_batch(grid, ax, ay, w, h)
    feats = samples.reshape(n_sp, ANCHORS, -1).mean(axis=1)

    counts = np.bincount(flat, minlength=n_sp).astype(np.float64)
    xs = np.broadcast_to(np.arange(w, dtype=np.float64)[None, :], (h, w)).ravel()
    ys = np.broadcast_to(np.arange(h, dtype=np.float64)[:, None], (h, w)).ravel()
    cx = np.bincount(flat, weights=xs, minlength=n_sp) / counts
    cy = np.bincount(flat, weights=ys, minlength=n_sp) / counts
    zmean = np.bincount(flat, weights=d.data.astype(np.float64).ravel(),
                        minlength=n_sp) / counts

    return [
        SuperpixelDescriptor(
            label=lab,
            feature=feats[lab],
            centroid=(cx[lab], cy[lab]),
            mean_depth=float(zmean[lab]),
            area=int(counts[lab]),
        )
        for lab in range(n_sp)
    ]
