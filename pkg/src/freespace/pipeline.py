"""Pipeline orchestration: per-image segmentation and batch mask generation.

Per-image randomness derives from the global seed and the file stem, so
results are independent of batch order and worker count.
"""

import dataclasses
import json
import math
import zlib
from dataclasses import dataclass
from multiprocessing import Pool
from pathlib import Path

import numpy as np

from . import align, cluster, dasp, features, io
from .errors import ConfigError, FreespaceError, IoError, NoSeeds
from .types import (
    AnnotationParams,
    ClusterParams,
    DaspParams,
    DepthMap,
    FeatureGrid,
    FreeSpaceMask,
    RgbImage,
)


@dataclass(frozen=True)
class PipelineConfig:
    dasp: DaspParams = DaspParams()
    cluster: ClusterParams = ClusterParams()
    annotate: AnnotationParams = AnnotationParams()
    feature_source: str = "fallback"  # "fallback" | "ingest"
    feature_grid: int = 24
    feature_dir: str = ""
    seed: int = 0
    jobs: int = 1
    debug_json: bool = False

    def __post_init__(self):
        if self.feature_source not in ("fallback", "ingest"):
            raise ConfigError(f"unknown feature source {self.feature_source!r}")
        if self.feature_source == "ingest" and not self.feature_dir:
            raise ConfigError("ingest feature source needs feature_dir")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        d = dict(d)
        try:
            for key, typ in (("dasp", DaspParams), ("cluster", ClusterParams),
                             ("annotate", AnnotationParams)):
                if key in d and isinstance(d[key], dict):
                    d[key] = typ(**d[key])
            return cls(**d)
        except (TypeError, FreespaceError) as e:
            raise ConfigError(f"bad config: {e}") from e

    @classmethod
    def from_json_file(cls, path) -> "PipelineConfig":
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {p}")
        try:
            return cls.from_dict(json.loads(p.read_text(encoding="utf-8")))
        except json.JSONDecodeError as e:
            raise ConfigError(f"config is not valid JSON: {e}") from e


def derive_seed(global_seed: int, stem: str) -> int:
    """Stable per-image seed; independent of batch order and worker count."""
    return (global_seed * 0x9E3779B1 + zlib.crc32(stem.encode("utf-8"))) % (1 << 63)


def segment_image(rgb: RgbImage, depth: DepthMap, cfg: PipelineConfig,
                  seed: int, grid: FeatureGrid = None):
    """Run the full single-image pipeline.

    Returns (mask, diagnostics); diagnostics carries the superpixel map and
    descriptors for debug export along with cluster statistics.
    """
    d = dasp.repair_depth(depth)
    dasp_p = dataclasses.replace(cfg.dasp, rng_seed=seed)
    rho = dasp.compute_density(d, dasp_p)
    centers = dasp.poisson_disc_sample(rho, seed, rgb, d)
    sp = dasp.iterate_clusters(rgb, d, centers, dasp_p)
    try:
        seeds = dasp.extract_seeds(d, dasp_p)
    except NoSeeds:
        seeds = dasp.deepest_pixel_seed(d)
    if grid is None:
        grid = features.fallback_features(rgb, d, cfg.feature_grid)
    descs = align.pool_superpixels(sp, grid, d)
    diag_len = math.hypot(rgb.width, rgb.height)
    weights = cluster.attraction_weights(descs, seeds, cfg.cluster.sigma, diag_len)
    cluster_p = dataclasses.replace(cfg.cluster, rng_seed=seed + 1)
    init = cluster.init_centers(descs, weights, cluster_p.k, cluster_p.rng_seed)
    assign = cluster.kmeans(descs, init, cluster_p)
    chosen = cluster.select_freespace_cluster(assign, descs)
    assign = dataclasses.replace(assign, freespace_cluster=chosen)
    mask = cluster.rasterize_mask(sp, assign, chosen)

    areas = np.array([dc.area for dc in descs], dtype=np.float64)
    depths = np.array([dc.mean_depth for dc in descs], dtype=np.float64)
    num = np.bincount(assign.labels, weights=areas * depths, minlength=assign.k)
    den = np.bincount(assign.labels, weights=areas, minlength=assign.k)
    diagnostics = {
        "superpixels": sp,
        "descriptors": descs,
        "assignment": assign,
        "cluster_mean_depth": (num / den).tolist(),
        "cluster_sizes": np.bincount(assign.labels, minlength=assign.k).tolist(),
        "chosen_cluster": chosen,
        "chosen_disagrees_with_attracted": chosen != 0,
        "seed_count": len(seeds.seeds),
    }
    return mask, diagnostics


def _find_depth(depth_dir: Path, stem: str) -> Path:
    for suffix in (".png", ".npy"):
        p = depth_dir / f"{stem}{suffix}"
        if p.is_file():
            return p
    raise IoError(f"no depth file for stem '{stem}' under {depth_dir}")


def process_stem(args) -> tuple:
    """Worker for one image; returns (stem, error-string-or-None)."""
    (stem, rgb_path, depth_dir, feat_dir, out_dir, cfg) = args
    try:
        rgb = io.load_image(rgb_path)
        depth = io.load_depth(_find_depth(Path(depth_dir), stem))
        if rgb.data.shape[:2] != depth.data.shape:
            raise FreespaceError(
                f"rgb {rgb.data.shape[:2]} vs depth {depth.data.shape} size mismatch"
            )
        grid = None
        if cfg.feature_source == "ingest":
            feat_path = Path(feat_dir) / f"{stem}.feat.npy"
            if not feat_path.is_file():
                raise IoError(f"no feature file for stem '{stem}': {feat_path}")
            grid = features.ingest_token_features(feat_path)
        seed = derive_seed(cfg.seed, stem)
        mask, diag = segment_image(rgb, depth, cfg, seed, grid)
        out = Path(out_dir)
        io.save_mask(mask, out / f"{stem}.png")
        if cfg.debug_json:
            _write_debug(out, stem, diag)
        return stem, None
    except FreespaceError as e:
        return stem, f"{type(e).__name__}: {e}"


def _write_debug(out: Path, stem: str, diag: dict) -> None:
    sp = diag["superpixels"]
    io.write_npy_int32(sp.labels, out / f"{stem}.sp.npy")
    descs = diag["descriptors"]
    table = np.stack(
        [
            np.concatenate(
                [dc.feature, [dc.centroid[0], dc.centroid[1], dc.mean_depth, dc.area]]
            )
            for dc in descs
        ]
    ).astype(np.float32)
    io.write_npy(table, out / f"{stem}.desc.npy")
    payload = {
        k: diag[k]
        for k in (
            "cluster_mean_depth",
            "cluster_sizes",
            "chosen_cluster",
            "chosen_disagrees_with_attracted",
            "seed_count",
        )
    }
    (out / f"{stem}.debug.json").write_text(
        json.dumps(payload, indent=2) + "\n", encoding="utf-8"
    )


def run_maskgen(rgb_dir, depth_dir, out_dir, cfg: PipelineConfig) -> list:
    """Generate masks for every RGB stem; returns [(stem, error-or-None)].

    Per-image failures do not stop the batch.
    """
    rgb_dir = Path(rgb_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stems = sorted(
        {p.stem: p for p in list(rgb_dir.glob("*.png")) + list(rgb_dir.glob("*.ppm"))}.items()
    )
    if not stems:
        raise ConfigError(f"no input images under {rgb_dir}")
    tasks = [
        (stem, str(path), str(depth_dir), cfg.feature_dir, str(out), cfg)
        for stem, path in stems
    ]
    if cfg.jobs > 1:
        with Pool(cfg.jobs) as pool:
            return pool.map(process_stem, tasks)
    return [process_stem(t) for t in tasks]
