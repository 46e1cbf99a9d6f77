"""Depth-adaptive superpixels.

Stage order: repair_depth -> compute_density -> poisson_disc_sample ->
iterate_clusters (-> enforce_connectivity inside) and extract_seeds for the
downstream clustering bias. Density follows rho(x) = c * z(x)^gamma
normalized so the map sums to the target superpixel count; with the default
gamma = -2 deeper (open) regions get sparser, larger superpixels.
"""

import numpy as np
from scipy import ndimage

from . import kernels
from .errors import DegenerateInput, NoSeeds, SamplingExhausted
from .types import (
    ClusterCenter,
    DaspParams,
    DensityMap,
    DepthMap,
    RgbImage,
    Seed,
    SeedSet,
    SuperpixelMap,
)

_FOUR_CONN = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


def repair_depth(d: DepthMap) -> DepthMap:
    """Replace invalid depth (NaN/inf/<=0) by the median of nearby valid pixels.

    Window grows 5x5 -> 9x9; if both windows hold no valid pixel the global
    median of valid values is used. All-invalid input raises DegenerateInput.
    Valid input is returned unchanged (same object).
    """
    z = d.data
    valid = np.isfinite(z) & (z > 0)
    if valid.all():
        return d
    if not valid.any():
        raise DegenerateInput("depth map has no valid pixel")
    h, w = z.shape
    out = z.astype(np.float64)
    global_med = float(np.median(z[valid]))
    for y, x in zip(*np.nonzero(~valid)):
        fill = global_med
        for half in (2, 4):
            win = z[max(y - half, 0):y + half + 1, max(x - half, 0):x + half + 1]
            vwin = valid[max(y - half, 0):y + half + 1, max(x - half, 0):x + half + 1]
            if vwin.any():
                fill = float(np.median(win[vwin]))
                break
        out[y, x] = fill
    return DepthMap(out.astype(np.float32))


def compute_density(d: DepthMap, p: DaspParams) -> DensityMap:
    """Density law rho = c * z^gamma with c normalizing the sum to N."""
    z = d.data.astype(np.float64)
    rho = z ** p.density_exponent
    rho *= p.target_superpixels / rho.sum()
    return DensityMap(rho, p.target_superpixels)


def poisson_disc_sample(rho: DensityMap, rng_seed: int,
                        img: RgbImage = None, depth: DepthMap = None) -> list:
    """Variable-radius dart throwing over the density field.

    Darts are drawn with probability proportional to rho (inverse-CDF over
    pixels) so accepted-center composition tracks the density law; each dart
    carries the local radius r = 1/sqrt(rho*pi) and is accepted when no
    earlier center is closer than 0.8*min(r_i, r_j). Acceptance stops at N
    centers or after 50*N attempts. Color/depth of each center come from the
    pixel under it (zero when img/depth are omitted).
    """
    r = rho.rho
    h, w = r.shape
    n_target = rho.target_count
    n_attempts = 50 * n_target
    flat = r.ravel()
    cdf = np.cumsum(flat)
    rng = np.random.default_rng(rng_seed)
    u = rng.random(n_attempts) * cdf[-1]
    idx = np.minimum(np.searchsorted(cdf, u, side="right"), flat.size - 1)
    pys, pxs = np.divmod(idx, w)
    px = pxs + 0.5
    py = pys + 0.5
    rr = 1.0 / np.sqrt(flat[idx] * np.pi)
    cell = float(max(1.0, 0.8 * float(np.median(rr)) / np.sqrt(2.0)))
    gw = max(int(np.ceil(w / cell)), 1)
    gh = max(int(np.ceil(h / cell)), 1)
    accepted = np.full(n_attempts, -1, np.int32)
    count = kernels.poisson_accept(px, py, rr, 0.8, n_target, cell, gw, gh, accepted)
    if count < 2:
        raise SamplingExhausted(
            f"placed {count} centers after {n_attempts} attempts"
        )
    chosen = accepted[:count]
    cols = (
        img.data[pys[chosen], pxs[chosen]].astype(np.float64)
        if img is not None
        else np.zeros((count, 3))
    )
    deps = (
        depth.data[pys[chosen], pxs[chosen]].astype(np.float64)
        if depth is not None
        else np.zeros(count)
    )
    return [
        ClusterCenter(
            x=float(px[j]),
            y=float(py[j]),
            color=cols[i],
            depth=float(deps[i]),
            radius=float(rr[j]),
        )
        for i, j in enumerate(chosen)
    ]


def iterate_clusters(img: RgbImage, d: DepthMap, centers: list,
                     p: DaspParams, return_trace: bool = False):
    """Local iterative clustering around the sampled centers.

    Each round every center claims pixels inside its (4r)x(4r) window by the
    combined color/depth/position distance, keeping incumbent assignments as
    candidates (which makes the objective non-increasing); centers then move
    to their member means. Unclaimed pixels fall back to the spatially
    nearest center. Connectivity is enforced at the end.
    """
    if len(centers) < 2:
        raise SamplingExhausted("need at least 2 centers")
    rgb = img.data.astype(np.float64)
    z = d.data.astype(np.float64)
    h, w = z.shape
    k = len(centers)
    cx = np.array([c.x for c in centers], dtype=np.float64)
    cy = np.array([c.y for c in centers], dtype=np.float64)
    ccol = np.array([c.color for c in centers], dtype=np.float64)
    cdep = np.array([c.depth for c in centers], dtype=np.float64)
    crad = np.array([c.radius for c in centers], dtype=np.float64)
    inv_mc2 = 1.0 / (p.compactness_color * p.compactness_color)
    inv_mz2 = 1.0 / (p.compactness_depth * p.compactness_depth)

    xs = np.arange(w, dtype=np.float64) + 0.5
    ys = np.arange(h, dtype=np.float64) + 0.5
    gx = np.broadcast_to(xs[None, :], (h, w))
    gy = np.broadcast_to(ys[:, None], (h, w))

    labels = np.full((h, w), -1, np.int32)
    labels_next = np.empty((h, w), np.int32)
    dist = np.empty((h, w), np.float64)
    trace = []
    for _ in range(p.iterations):
        kernels.assign_pixels(rgb, z, cx, cy, ccol, cdep, crad, inv_mc2, inv_mz2,
                              labels, labels_next, dist)
        kernels.assign_nearest(rgb, z, cx, cy, ccol, cdep, crad, inv_mc2, inv_mz2,
                               labels_next, dist)
        labels, labels_next = labels_next, labels
        trace.append(float(dist.sum()))
        flat = labels.ravel()
        cnt = np.bincount(flat, minlength=k).astype(np.float64)
        nz = cnt > 0
        for arr, vals in (
            (cx, gx.ravel()),
            (cy, gy.ravel()),
            (cdep, z.ravel()),
        ):
            s = np.bincount(flat, weights=vals, minlength=k)
            arr[nz] = s[nz] / cnt[nz]
        for ch in range(3):
            s = np.bincount(flat, weights=rgb[:, :, ch].ravel(), minlength=k)
            ccol[nz, ch] = s[nz] / cnt[nz]

    sp = _enforce_connectivity_raw(labels)
    if return_trace:
        return sp, trace
    return sp


def _enforce_connectivity_raw(labels: np.ndarray) -> SuperpixelMap:
    h, w = labels.shape
    comp = np.empty((h, w), np.int32)
    ncomp = kernels.connected_components(labels, comp)

    flat_comp = comp.ravel()
    flat_lab = labels.ravel()
    sizes = np.bincount(flat_comp, minlength=ncomp)
    comp_label = np.empty(ncomp, np.int64)
    comp_label[flat_comp] = flat_lab  # every pixel of a comp shares the label

    # keeper per label: largest component, ties to earliest raster occurrence
    comp_ids = np.arange(ncomp)
    order = np.lexsort((comp_ids, -sizes, comp_label[comp_ids]))
    lab_sorted = comp_label[order]
    first = np.r_[True, lab_sorted[1:] != lab_sorted[:-1]]
    keepers = order[first]
    region = np.full(ncomp, -1, np.int64)
    region[keepers] = comp_label[keepers]

    if (region < 0).any():
        neighbors = _component_adjacency(comp, ncomp)
        orphans = [c for c in range(ncomp) if region[c] < 0]
        max_label = int(flat_lab.max())
        while orphans:
            remaining = []
            progressed = False
            for c in orphans:
                nb, cnts = neighbors.get(c, (None, None))
                if nb is None:
                    remaining.append(c)
                    continue
                regs = region[nb]
                ok = regs >= 0
                if not ok.any():
                    remaining.append(c)
                    continue
                share = np.bincount(regs[ok].astype(np.int64),
                                    weights=cnts[ok], minlength=max_label + 1)
                region[c] = int(np.argmax(share))
                progressed = True
            if not progressed:
                # cannot happen on a connected raster; guard against loops
                raise RuntimeError("orphan merge made no progress")
            orphans = remaining

    merged = region[flat_comp]
    uniq = np.unique(merged)
    lut = np.full(int(uniq.max()) + 1, -1, np.int64)
    lut[uniq] = np.arange(uniq.size)
    dense = lut[merged].reshape(h, w).astype(np.int32)
    return SuperpixelMap(labels=dense, count=int(uniq.size))


def _component_adjacency(comp: np.ndarray, ncomp: int) -> dict:
    """Boundary-length counts between 4-adjacent components, keyed by comp id."""
    a1 = comp[:, :-1].ravel()
    b1 = comp[:, 1:].ravel()
    a2 = comp[:-1, :].ravel()
    b2 = comp[1:, :].ravel()
    m1 = a1 != b1
    m2 = a2 != b2
    src = np.concatenate([a1[m1], b1[m1], a2[m2], b2[m2]]).astype(np.int64)
    dst = np.concatenate([b1[m1], a1[m1], b2[m2], a2[m2]]).astype(np.int64)
    enc = src * ncomp + dst
    uenc, counts = np.unique(enc, return_counts=True)
    usrc = uenc // ncomp
    udst = uenc % ncomp
    out = {}
    starts = np.searchsorted(usrc, np.arange(ncomp + 1))
    for c in range(ncomp):
        s, e = starts[c], starts[c + 1]
        if s < e:
            out[c] = (udst[s:e], counts[s:e].astype(np.float64))
    return out


def enforce_connectivity(sp: SuperpixelMap) -> SuperpixelMap:
    """Split stray fragments off their labels and merge them into the
    adjacent region sharing the longest boundary; labels come out dense."""
    return _enforce_connectivity_raw(np.asarray(sp.labels))


def extract_seeds(d: DepthMap, p: DaspParams) -> SeedSet:
    """Deep low-gradient regions, the free-space prior.

    Candidates are pixels whose Sobel depth-gradient magnitude is at or
    below its seed_grad_pct percentile and whose depth is at or above the
    seed_depth_pct percentile (inclusive on both sides so constant maps
    degenerate to the whole image). 4-connected candidate components
    smaller than seed_min_area of the image are dropped; each survivor
    yields a seed at its centroid scored by component mean depth; the
    seed_top_k deepest are kept, sorted descending.
    """
    z = d.data.astype(np.float64)
    gx = ndimage.sobel(z, axis=1)
    gy = ndimage.sobel(z, axis=0)
    grad = np.hypot(gx, gy)
    gthr = np.percentile(grad, p.seed_grad_pct)
    zthr = np.percentile(z, p.seed_depth_pct)
    cand = (grad <= gthr) & (z >= zthr)
    if not cand.any():
        raise NoSeeds("no pixel passed the gradient/depth thresholds")
    comp, ncc = ndimage.label(cand, structure=_FOUR_CONN)
    min_area = p.seed_min_area * z.size
    seeds = []
    for i in range(1, ncc + 1):
        m = comp == i
        area = int(m.sum())
        if area < min_area:
            continue
        ys, xs = np.nonzero(m)
        seeds.append(Seed(float(xs.mean()), float(ys.mean()), float(z[m].mean())))
    if not seeds:
        raise NoSeeds("no candidate component reached the minimum area")
    seeds.sort(key=lambda s: -s.score)
    return SeedSet(tuple(seeds[:p.seed_top_k]))


def deepest_pixel_seed(d: DepthMap) -> SeedSet:
    """Fallback for NoSeeds: the single deepest pixel (first in raster order)."""
    z = d.data
    idx = int(np.argmax(z))
    y, x = divmod(idx, z.shape[1])
    return SeedSet((Seed(float(x), float(y), float(z[y, x])),))
