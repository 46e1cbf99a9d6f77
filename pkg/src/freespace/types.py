"""Shared domain types: raster containers and parameter bundles.

All containers freeze their arrays after validation, so instances are
immutable and safe to share across pipeline workers.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ParamError, ShapeError


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class RgbImage:
    """8-bit 3-channel image, row-major (H, W, 3)."""

    data: np.ndarray

    def __post_init__(self):
        d = self.data
        if d.ndim != 3 or d.shape[2] != 3:
            raise ShapeError(f"rgb image must be (H, W, 3), got {d.shape}")
        if d.dtype != np.uint8:
            raise ShapeError(f"rgb image must be uint8, got {d.dtype}")
        if d.shape[0] < 1 or d.shape[1] < 1:
            raise ShapeError("rgb image must be at least 1x1")
        object.__setattr__(self, "data", _frozen(d))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class DepthMap:
    """Per-pixel depth in meters, float32 (H, W).

    NaN/inf/zero mark invalid pixels and are allowed until repair_depth;
    everything downstream of repair assumes finite positive values.
    """

    data: np.ndarray

    def __post_init__(self):
        d = self.data
        if d.ndim != 2:
            raise ShapeError(f"depth map must be 2-D, got shape {d.shape}")
        if d.dtype != np.float32:
            d = d.astype(np.float32)
        object.__setattr__(self, "data", _frozen(d))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class FreeSpaceMask:
    """Boolean raster, free = True."""

    data: np.ndarray

    def __post_init__(self):
        d = self.data
        if d.ndim != 2:
            raise ShapeError(f"mask must be 2-D, got shape {d.shape}")
        if d.dtype != np.bool_:
            raise ShapeError(f"mask must be bool, got {d.dtype}")
        object.__setattr__(self, "data", _frozen(d))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class SuperpixelMap:
    """Dense label raster partitioning the image.

    labels are int32 in [0, count) and every label occurs at least once.
    Single-component-per-label holds only after connectivity enforcement.
    """

    labels: np.ndarray
    count: int

    def __post_init__(self):
        lab = self.labels
        if lab.ndim != 2:
            raise ShapeError(f"labels must be 2-D, got shape {lab.shape}")
        if lab.dtype != np.int32:
            lab = lab.astype(np.int32)
        if self.count < 1:
            raise ShapeError("superpixel count must be >= 1")
        if lab.min() < 0 or lab.max() >= self.count:
            raise ShapeError("labels outside [0, count)")
        hist = np.bincount(lab.ravel(), minlength=self.count)
        if hist.size > self.count or (hist == 0).any():
            raise ShapeError("label histogram has empty bins")
        object.__setattr__(self, "labels", _frozen(lab))

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]


@dataclass(frozen=True)
class DensityMap:
    """Superpixels-per-pixel density; sums to the target count."""

    rho: np.ndarray
    target_count: int

    def __post_init__(self):
        r = self.rho
        if r.ndim != 2:
            raise ShapeError(f"density must be 2-D, got shape {r.shape}")
        r = r.astype(np.float64)
        if not np.isfinite(r).all() or (r <= 0).any():
            raise ShapeError("density must be finite and > 0 everywhere")
        total = float(r.sum())
        if abs(total - self.target_count) > 1e-6 * self.target_count:
            raise ShapeError(
                f"density sums to {total}, expected {self.target_count}"
            )
        object.__setattr__(self, "rho", _frozen(r))

    @property
    def height(self) -> int:
        return self.rho.shape[0]

    @property
    def width(self) -> int:
        return self.rho.shape[1]


@dataclass(frozen=True)
class ClusterCenter:
    """A superpixel cluster center in continuous pixel coordinates."""

    x: float
    y: float
    color: np.ndarray  # (3,) float64, 0-255 scale
    depth: float
    radius: float  # pixels, local 1/sqrt(rho*pi) scale

    def __post_init__(self):
        if self.radius <= 0:
            raise ShapeError("center radius must be > 0")
        c = np.asarray(self.color, dtype=np.float64)
        if c.shape != (3,):
            raise ShapeError("center color must have 3 components")
        object.__setattr__(self, "color", _frozen(c))


class Seed(NamedTuple):
    x: float
    y: float
    score: float  # component mean depth, meters


@dataclass(frozen=True)
class SeedSet:
    """Seed locations sorted descending by mean-depth score."""

    seeds: tuple

    def __post_init__(self):
        if len(self.seeds) == 0:
            raise ShapeError("seed set must be non-empty")
        scores = [s.score for s in self.seeds]
        if any(a < b for a, b in zip(scores, scores[1:])):
            raise ShapeError("seeds must be sorted descending by score")
        object.__setattr__(self, "seeds", tuple(self.seeds))


@dataclass(frozen=True)
class FeatureGrid:
    """Spatial grid of D-dimensional descriptors, row-major (grid_h, grid_w, D)."""

    data: np.ndarray

    def __post_init__(self):
        d = self.data
        if d.ndim != 3:
            raise ShapeError(f"feature grid must be 3-D, got shape {d.shape}")
        if d.shape[0] < 2 or d.shape[1] < 2:
            raise ShapeError("feature grid must be at least 2x2 cells")
        if d.shape[2] < 1:
            raise ShapeError("feature dimension must be >= 1")
        d = d.astype(np.float32, copy=False)
        if not np.isfinite(d).all():
            raise ShapeError("feature grid contains non-finite values")
        object.__setattr__(self, "data", _frozen(d))

    @property
    def grid_h(self) -> int:
        return self.data.shape[0]

    @property
    def grid_w(self) -> int:
        return self.data.shape[1]

    @property
    def dim(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class SuperpixelDescriptor:
    """Pooled per-superpixel descriptor."""

    label: int
    feature: np.ndarray  # (D,) float64
    centroid: tuple  # (x, y) continuous pixels
    mean_depth: float
    area: int

    def __post_init__(self):
        f = np.asarray(self.feature, dtype=np.float64)
        if f.ndim != 1 or not np.isfinite(f).all():
            raise ShapeError("descriptor feature must be a finite 1-D vector")
        if self.area < 1:
            raise ShapeError("descriptor area must be >= 1")
        object.__setattr__(self, "feature", _frozen(f))
        object.__setattr__(self, "centroid", (float(self.centroid[0]), float(self.centroid[1])))


@dataclass(frozen=True)
class ClusterAssignment:
    """k-means result over superpixel descriptors.

    freespace_cluster defaults to 0; the pipeline replaces it with the
    selected index after select_freespace_cluster.
    """

    labels: np.ndarray  # (n,) int32
    centers: np.ndarray  # (k, D) float64
    freespace_cluster: int = 0
    iterations_run: int = 0

    def __post_init__(self):
        lab = np.asarray(self.labels, dtype=np.int32)
        cen = np.asarray(self.centers, dtype=np.float64)
        k = cen.shape[0]
        if lab.ndim != 1 or cen.ndim != 2:
            raise ShapeError("assignment needs 1-D labels and 2-D centers")
        if lab.min() < 0 or lab.max() >= k:
            raise ShapeError("cluster labels outside [0, k)")
        if np.bincount(lab, minlength=k).min() == 0:
            raise ShapeError("empty cluster in assignment")
        if not 0 <= self.freespace_cluster < k:
            raise ShapeError("freespace_cluster outside [0, k)")
        object.__setattr__(self, "labels", _frozen(lab))
        object.__setattr__(self, "centers", _frozen(cen))

    @property
    def k(self) -> int:
        return self.centers.shape[0]


@dataclass(frozen=True)
class DaspParams:
    """Superpixel stage parameters.

    target_superpixels is the density normalizer N; density_exponent is the
    exponent of the depth-to-density law (negative = open areas sparser).
    Compactness constants weight the color (0-255 scale) and depth (meters)
    terms of the assignment distance. Seed-extraction thresholds are the
    gradient/depth percentiles, minimum component area fraction, and the
    number of seeds kept.
    """

    target_superpixels: int = 400
    density_exponent: float = -2.0
    compactness_color: float = 10.0
    compactness_depth: float = 0.5
    iterations: int = 10
    rng_seed: int = 0
    seed_grad_pct: float = 30.0
    seed_depth_pct: float = 80.0
    seed_min_area: float = 0.005
    seed_top_k: int = 5

    def __post_init__(self):
        if self.target_superpixels < 2:
            raise ParamError("target_superpixels must be >= 2")
        if self.iterations < 1:
            raise ParamError("iterations must be >= 1")
        if self.compactness_color <= 0 or self.compactness_depth <= 0:
            raise ParamError("compactness constants must be > 0")
        if not 0 <= self.seed_grad_pct <= 100 or not 0 <= self.seed_depth_pct <= 100:
            raise ParamError("seed percentiles must lie in [0, 100]")
        if self.seed_min_area < 0 or self.seed_top_k < 1:
            raise ParamError("seed area/top-k out of domain")


@dataclass(frozen=True)
class ClusterParams:
    """Descriptor-clustering parameters; sigma is a fraction of the image diagonal."""

    k: int = 5
    sigma: float = 0.15
    max_iter: int = 100
    tol: float = 1e-4
    rng_seed: int = 0

    def __post_init__(self):
        if self.k < 2:
            raise ParamError("k must be >= 2")
        if self.sigma <= 0:
            raise ParamError("sigma must be > 0")
        if self.max_iter < 1:
            raise ParamError("max_iter must be >= 1")
        if self.tol < 0:
            raise ParamError("tol must be >= 0")


@dataclass(frozen=True)
class AnnotationParams:
    """Telemetry labeling thresholds."""

    v_thresh: float = 1.0
    window: float = 2.5
    laser_clear: float = 1.2
    ang_min: float = 0.05

    def __post_init__(self):
        for name in ("v_thresh", "window", "laser_clear", "ang_min"):
            if getattr(self, name) <= 0:
                raise ParamError(f"{name} must be > 0")


class TelemetryRecord(NamedTuple):
    t: float
    v_fl: float
    v_fr: float
    v_rl: float
    v_rr: float
    cmd_lin: float
    cmd_ang: float
    laser_min: float


class FrameIndex(NamedTuple):
    frame_id: str
    t: float


@dataclass(frozen=True)
class LabelSet:
    """Disjoint positive/unlabeled frame-id partitions."""

    positive: tuple
    unlabeled: tuple

    def __post_init__(self):
        pos, unl = tuple(self.positive), tuple(self.unlabeled)
        if set(pos) & set(unl):
            raise ShapeError("positive and unlabeled sets overlap")
        object.__setattr__(self, "positive", pos)
        object.__setattr__(self, "unlabeled", unl)
