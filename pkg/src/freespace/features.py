"""Dense feature grids: transformer-dump ingestion and a handcrafted fallback.

The fallback descriptor is deliberately small (D=16); everything downstream
is dimension-agnostic, so swapping in a (577,1024) dump changes nothing but
the numbers.
"""

import math

import numpy as np

from .errors import ParamError, ShapeError
from .io import read_npy
from .types import DepthMap, FeatureGrid, RgbImage


def ingest_token_features(path) -> FeatureGrid:
    """Load a feature dump.

    Token form (T, D) requires T = G^2 + 1: the leading global token carries
    no pixel location and is dropped, the rest reshape to (G, G, D) in
    row-major patch order. Spatial form (H, W, D) passes through.
    """
    arr = read_npy(path)
    if arr.ndim == 2:
        t = arr.shape[0]
        g = math.isqrt(max(t - 1, 0))
        if t < 2 or g * g != t - 1:
            raise ShapeError(
                f"token count {t} is not a square grid plus one global token"
            )
        grid = arr[1:].reshape(g, g, arr.shape[1])
    elif arr.ndim == 3:
        grid = arr
    else:
        raise ShapeError(f"feature dump must be rank 2 or 3, got {arr.ndim}")
    return FeatureGrid(grid)


def fallback_features(img: RgbImage, d: DepthMap, grid: int = 24) -> FeatureGrid:
    """Handcrafted per-cell descriptor, D = 16.

    Cells are an even grid x grid split of the image. Descriptor blocks:
    mean RGB (3), RGB std (3), mean depth (1), depth std (1), and an 8-bin
    gray-gradient orientation histogram weighted by gradient magnitude.
    Each block is min-max normalized over the whole image (jointly across
    the block's channels), so constant blocks come out zero.
    """
    if grid < 2:
        raise ParamError("feature grid must be at least 2 cells per side")
    h, w = d.data.shape
    if grid > min(h, w):
        raise ParamError(f"grid {grid} exceeds image size {w}x{h}")
    rgb = img.data.astype(np.float64)
    z = d.data.astype(np.float64)

    row_cell = (np.arange(h) * grid) // h
    col_cell = (np.arange(w) * grid) // w
    cell_idx = (row_cell[:, None] * grid + col_cell[None, :]).ravel()
    ncells = grid * grid
    counts = np.bincount(cell_idx, minlength=ncells).astype(np.float64)

    def cell_mean_std(channel):
        s = np.bincount(cell_idx, weights=channel.ravel(), minlength=ncells)
        sq = np.bincount(cell_idx, weights=(channel * channel).ravel(), minlength=ncells)
        mean = s / counts
        var = np.maximum(sq / counts - mean * mean, 0.0)
        return mean, np.sqrt(var)

    means = np.empty((ncells, 3))
    stds = np.empty((ncells, 3))
    for ch in range(3):
        means[:, ch], stds[:, ch] = cell_mean_std(rgb[:, :, ch])
    zmean, zstd = cell_mean_std(z)

    gray = 0.299 * rgb[:, :, 0] + 0.587 * rgb[:, :, 1] + 0.114 * rgb[:, :, 2]
    gy, gx = np.gradient(gray)
    mag = np.hypot(gx, gy)
    theta = np.arctan2(gy, gx)  # [-pi, pi]
    bins = np.minimum((theta + np.pi) / (np.pi / 4.0), 7.0).astype(np.int64)
    hist = np.bincount(cell_idx * 8 + bins.ravel(), weights=mag.ravel(),
                       minlength=ncells * 8).reshape(ncells, 8)

    def norm_block(block):
        lo = block.min()
        hi = block.max()
        if hi > lo:
            return (block - lo) / (hi - lo)
        return np.zeros_like(block)

    feat = np.concatenate(
        [
            norm_block(means),
            norm_block(stds),
            norm_block(zmean[:, None]),
            norm_block(zstd[:, None]),
            norm_block(hist),
        ],
        axis=1,
    )
    return FeatureGrid(feat.reshape(grid, grid, 16).astype(np.float32))
