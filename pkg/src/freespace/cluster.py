"""Descriptor clustering with a depth/seed-attracted first center and
repelled remaining centers, then deepest-cluster selection and mask
rasterization."""

import numpy as np

from .errors import DegenerateWeights, DimensionMismatch, TooFewDescriptors
from .types import ClusterAssignment, ClusterParams, FreeSpaceMask, SeedSet, SuperpixelMap


def attraction_weights(descs: list, seeds: SeedSet, sigma: float,
                       image_diag: float) -> np.ndarray:
    """w_i = zhat_i * exp(-d_i^2 / (2*(sigma*diag)^2)).

    zhat is the descriptor mean depth min-max normalized over descriptors
    (constant positive depth degenerates to all ones); d_i is the centroid
    distance to the nearest seed. All-zero constant depth has no usable
    signal and raises DegenerateWeights.
    """
    z = np.array([dc.mean_depth for dc in descs], dtype=np.float64)
    zmin = z.min()
    zmax = z.max()
    if zmax > zmin:
        zhat = (z - zmin) / (zmax - zmin)
    elif zmax > 0:
        zhat = np.ones_like(z)
    else:
        raise DegenerateWeights("constant zero depth")
    cx = np.array([dc.centroid[0] for dc in descs], dtype=np.float64)
    cy = np.array([dc.centroid[1] for dc in descs], dtype=np.float64)
    d2 = np.full(z.shape, np.inf)
    for s in seeds.seeds:
        dx = cx - s.x
        dy = cy - s.y
        d2 = np.minimum(d2, dx * dx + dy * dy)
    w = zhat * np.exp(-d2 / (2.0 * (sigma * image_diag) ** 2))
    if not (w > 0).any():
        raise DegenerateWeights("all attraction weights are zero")
    return w


def init_centers(descs: list, weights: np.ndarray, k: int, rng_seed: int) -> np.ndarray:
    """Attraction/repulsion initialization.

    Center 0 is the attraction-weighted feature mean. Centers 1..k-1 are
    drawn from the descriptors with probability proportional to
    (1 - w_i) * minsq_dist(f_i, chosen), spreading them away from both the
    free-space prior and each other.
    """
    n = len(descs)
    if n < k:
        raise TooFewDescriptors(f"{n} descriptors for k={k}")
    feats = np.stack([dc.feature for dc in descs]).astype(np.float64)
    wsum = float(weights.sum())
    if wsum <= 0:
        raise DegenerateWeights("weights sum to zero")
    centers = np.empty((k, feats.shape[1]), dtype=np.float64)
    centers[0] = (weights[:, None] * feats).sum(axis=0) / wsum
    rng = np.random.default_rng(rng_seed)
    diff = feats - centers[0]
    minsq = (diff * diff).sum(axis=1)
    for j in range(1, k):
        p = repulsion_law(weights, minsq)
        idx = int(np.searchsorted(np.cumsum(p), rng.random(), side="right"))
        idx = min(idx, n - 1)
        centers[j] = feats[idx]
        diff = feats - centers[j]
        minsq = np.minimum(minsq, (diff * diff).sum(axis=1))
    return centers


def repulsion_law(weights: np.ndarray, minsq: np.ndarray) -> np.ndarray:
    """Normalized sampling probabilities for the repelled centers.

    Falls back to plain distance-squared when repulsion mass vanishes, and
    to uniform when every descriptor coincides with a chosen center.
    """
    p = (1.0 - weights) * minsq
    s = p.sum()
    if s <= 0:
        p = minsq.copy()
        s = p.sum()
    if s <= 0:
        p = np.ones_like(minsq)
        s = p.sum()
    return p / s


def kmeans(descs: list, centers: np.ndarray, p: ClusterParams,
           return_trace: bool = False):
    """Standard Lloyd iterations on the descriptor features.

    Empty clusters re-seed to the descriptor farthest from its current
    center. Stops when relative center movement drops below tol. The
    published labels are recomputed against the final centers, so
    reassignment is a fixed point. With return_trace the per-iteration
    objective (after each assignment) is returned alongside.
    """
    feats = np.stack([dc.feature for dc in descs]).astype(np.float64)
    n = feats.shape[0]
    cen = np.array(centers, dtype=np.float64, copy=True)
    k = cen.shape[0]
    if n < k:
        raise TooFewDescriptors(f"{n} descriptors for k={k}")

    def obj(lab):
        diff = feats - cen[lab]
        return float((diff * diff).sum())

    labels = _assign(feats, cen)
    trace = [obj(labels)]
    iterations_run = 0
    for it in range(1, p.max_iter + 1):
        labels = _repair_empties(feats, cen, labels)
        new_cen = np.empty_like(cen)
        cnt = np.bincount(labels, minlength=k).astype(np.float64)
        for j in range(feats.shape[1]):
            new_cen[:, j] = np.bincount(labels, weights=feats[:, j], minlength=k) / cnt
        move = np.linalg.norm(new_cen - cen) / max(np.linalg.norm(cen), 1e-12)
        cen = new_cen
        iterations_run = it
        labels = _assign(feats, cen)
        trace.append(obj(labels))
        if move < p.tol:
            break
    labels = _repair_empties(feats, cen, labels)
    assign = ClusterAssignment(labels=labels, centers=cen,
                               freespace_cluster=0, iterations_run=iterations_run)
    if return_trace:
        return assign, trace
    return assign


def _assign(feats: np.ndarray, cen: np.ndarray) -> np.ndarray:
    d2 = ((feats[:, None, :] - cen[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d2, axis=1).astype(np.int32)


def _repair_empties(feats: np.ndarray, cen: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Re-seed empty clusters to the worst-fit descriptor, in place on cen."""
    k = cen.shape[0]
    for _ in range(k + 1):
        sizes = np.bincount(labels, minlength=k)
        empties = np.nonzero(sizes == 0)[0]
        if empties.size == 0:
            return labels
        diff = feats - cen[labels]
        fit = (diff * diff).sum(axis=1)
        for c in empties:
            idx = int(np.argmax(fit))
            cen[c] = feats[idx]
            labels[idx] = c
            fit[idx] = -1.0
        labels = _assign(feats, cen)
    # duplicate descriptors can starve a center of members under pure
    # argmin tie-breaking; force the membership rather than loop forever
    sizes = np.bincount(labels, minlength=k)
    for c in np.nonzero(sizes == 0)[0]:
        diff = feats - cen[labels]
        fit = (diff * diff).sum(axis=1)
        idx = int(np.argmax(fit))
        cen[c] = feats[idx]
        labels[idx] = c
    return labels


def kmeans_objective(descs: list, labels: np.ndarray, centers: np.ndarray) -> float:
    feats = np.stack([dc.feature for dc in descs]).astype(np.float64)
    diff = feats - centers[labels]
    return float((diff * diff).sum())


def select_freespace_cluster(assign: ClusterAssignment, descs: list) -> int:
    """Cluster with the largest area-weighted mean depth; ties to lower index."""
    areas = np.array([dc.area for dc in descs], dtype=np.float64)
    depths = np.array([dc.mean_depth for dc in descs], dtype=np.float64)
    num = np.bincount(assign.labels, weights=areas * depths, minlength=assign.k)
    den = np.bincount(assign.labels, weights=areas, minlength=assign.k)
    score = num / den  # clusters are non-empty, den > 0
    return int(np.argmax(score))


def rasterize_mask(sp: SuperpixelMap, assign: ClusterAssignment, chosen: int) -> FreeSpaceMask:
    """free <=> the pixel's superpixel belongs to the chosen cluster."""
    if assign.labels.shape[0] != sp.count:
        raise DimensionMismatch(
            f"{assign.labels.shape[0]} cluster labels for {sp.count} superpixels"
        )
    member = assign.labels == chosen
    return FreeSpaceMask(member[sp.labels])
