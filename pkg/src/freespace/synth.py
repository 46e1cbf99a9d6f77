"""Synthetic RGB-D corridor scenes with exact free-space ground truth.

A pinhole camera sits at the origin of a world whose +y axis points down;
the floor is the plane y = cam_height and the camera pitches down by
`pitch`. The default pitch puts the horizon at the top image row, so every
background ray lands on the floor, whose depth is capped at far_cap (the
"vanishing region" of the corridor; the cap belongs to the floor's analytic
depth profile). Side walls are axis-aligned slabs that end in z before the
floor cap, keeping their depths below the far floor. Walls are two-tone
(baseboard band + upper tone) so even a one-box scene carries at least five
natural color groups. Truth marks exactly the pixels whose first hit is the
floor.
"""

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .errors import InvalidSpec
from .types import DepthMap, FreeSpaceMask, RgbImage


class Box(NamedTuple):
    x: float  # footprint center, meters
    z: float
    w: float  # extent along x
    d: float  # extent along z
    h: float  # height above floor
    color: tuple


BOX_PALETTE = (
    (205, 52, 46),
    (46, 166, 60),
    (228, 190, 48),
    (156, 48, 176),
    (38, 186, 196),
    (230, 120, 30),
)


@dataclass(frozen=True)
class SceneSpec:
    width: int = 320
    height: int = 240
    fx: float = 210.0
    fy: float = 210.0
    ppx: float = 160.0
    ppy: float = 120.0
    cam_height: float = 2.5
    pitch: float = math.atan2(120.0, 210.0)  # horizon on the top row
    far_cap: float = 3.0
    wall_gap: float = 1.5  # half corridor width
    wall_thickness: float = 0.25
    # Walls end early enough that every visible wall pixel stays nearer
    # than the far floor plateau; otherwise a small deep wall cluster can
    # out-rank the floor on mean depth.
    wall_z1: float = 1.65
    wall_height: float = 3.6
    wall_band_frac: float = 0.35
    floor_color: tuple = (108, 102, 96)
    wall_left_lower: tuple = (76, 62, 56)
    wall_left_upper: tuple = (92, 82, 74)
    wall_right_lower: tuple = (70, 72, 84)
    wall_right_upper: tuple = (88, 90, 100)
    void_color: tuple = (30, 30, 34)
    noise_sigma: float = 5.0
    boxes: tuple = ()
    walls: bool = True


@dataclass(frozen=True)
class SyntheticScene:
    rgb: RgbImage
    depth: DepthMap
    truth: FreeSpaceMask
    spec: SceneSpec


def _validate(spec: SceneSpec) -> None:
    if spec.width < 8 or spec.height < 8:
        raise InvalidSpec("image too small")
    if spec.fx <= 0 or spec.fy <= 0:
        raise InvalidSpec("focal lengths must be positive")
    if spec.cam_height <= 0 or spec.far_cap <= 0:
        raise InvalidSpec("camera height and far cap must be positive")
    if spec.walls and (spec.wall_gap <= 0 or spec.wall_thickness <= 0):
        raise InvalidSpec("wall geometry must be positive")
    for b in spec.boxes:
        if b.w <= 0 or b.d <= 0 or b.h <= 0:
            raise InvalidSpec(f"box extents must be positive: {b}")
        if b.z - b.d / 2.0 <= 0.05:
            raise InvalidSpec(f"box overlaps the camera plane: {b}")


def _rays(spec: SceneSpec):
    sx = (np.arange(spec.width, dtype=np.float64) + 0.5 - spec.ppx) / spec.fx
    sy = (np.arange(spec.height, dtype=np.float64) + 0.5 - spec.ppy) / spec.fy
    cp = math.cos(spec.pitch)
    sp = math.sin(spec.pitch)
    shape = (spec.height, spec.width)
    dxw = np.broadcast_to(sx[None, :], shape).copy()
    dyw = np.broadcast_to((sy * cp + sp)[:, None], shape).copy()
    dzw = np.broadcast_to((-sy * sp + cp)[:, None], shape).copy()
    return dxw, dyw, dzw


def _floor_t(spec: SceneSpec, dyw: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        t = np.where(dyw > 1e-12, spec.cam_height / dyw, np.inf)
    return t


def floor_depth_map(spec: SceneSpec) -> np.ndarray:
    """Analytic floor depth profile (with the far cap), float32 (H, W)."""
    _, dyw, _ = _rays(spec)
    t = _floor_t(spec, dyw)
    return np.minimum(t, spec.far_cap).astype(np.float32)


def _aabb_enter(bounds, dxw, dyw, dzw) -> np.ndarray:
    """Entry ray parameter of an axis-aligned box from the origin; inf on miss."""
    t_enter = np.full(dxw.shape, -np.inf)
    t_exit = np.full(dxw.shape, np.inf)
    miss = np.zeros(dxw.shape, dtype=bool)
    for (lo, hi), dcomp in zip(bounds, (dxw, dyw, dzw)):
        nz = dcomp != 0
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = np.where(nz, lo / dcomp, -np.inf)
            t2 = np.where(nz, hi / dcomp, np.inf)
        near = np.minimum(t1, t2)
        far = np.maximum(t1, t2)
        # zero direction component: hit only if the origin lies in the slab
        inside = lo <= 0.0 <= hi
        near = np.where(nz, near, -np.inf if inside else np.inf)
        far = np.where(nz, far, np.inf if inside else -np.inf)
        t_enter = np.maximum(t_enter, near)
        t_exit = np.minimum(t_exit, far)
        if not inside:
            miss |= ~nz
    hit = (~miss) & (t_enter <= t_exit) & (t_enter > 0)
    return np.where(hit, t_enter, np.inf)


def generate_scene(spec: SceneSpec, rng_seed: int) -> SyntheticScene:
    """Render the scene; deterministic per (spec, rng_seed).

    The seed drives only the RGB texture noise — geometry and depth are
    analytic, so truth pixels carry exactly the floor profile depth.
    """
    _validate(spec)
    h, w = spec.height, spec.width
    dxw, dyw, dzw = _rays(spec)
    t_floor = _floor_t(spec, dyw)
    if not np.isfinite(t_floor).any():
        raise InvalidSpec("floor not visible: camera never looks down")

    best_t = t_floor.copy()
    surf = np.where(np.isfinite(t_floor), 0, -1)

    objects = []
    if spec.walls:
        y0 = spec.cam_height - spec.wall_height
        y1 = spec.cam_height
        g = spec.wall_gap
        th = spec.wall_thickness
        objects.append((1, ((-g - th, -g), (y0, y1), (0.0, spec.wall_z1))))
        objects.append((2, ((g, g + th), (y0, y1), (0.0, spec.wall_z1))))
    for i, b in enumerate(spec.boxes):
        bounds = (
            (b.x - b.w / 2.0, b.x + b.w / 2.0),
            (spec.cam_height - b.h, spec.cam_height),
            (b.z - b.d / 2.0, b.z + b.d / 2.0),
        )
        objects.append((3 + i, bounds))

    for obj_id, bounds in objects:
        t = _aabb_enter(bounds, dxw, dyw, dzw)
        nearer = t < best_t
        best_t = np.where(nearer, t, best_t)
        surf = np.where(nearer, obj_id, surf)

    depth = np.where(surf == 0, np.minimum(best_t, spec.far_cap), best_t)
    depth = np.where(surf == -1, spec.far_cap, depth)
    truth = surf == 0

    base = np.empty((h, w, 3), dtype=np.float64)
    base[...] = np.asarray(spec.void_color, dtype=np.float64)
    base[truth] = spec.floor_color
    hit_y = best_t * dyw
    band_h = spec.wall_band_frac * spec.wall_height
    lower = hit_y >= spec.cam_height - band_h
    base[(surf == 1) & lower] = spec.wall_left_lower
    base[(surf == 1) & ~lower] = spec.wall_left_upper
    base[(surf == 2) & lower] = spec.wall_right_lower
    base[(surf == 2) & ~lower] = spec.wall_right_upper
    for i, b in enumerate(spec.boxes):
        base[surf == 3 + i] = b.color

    rng = np.random.default_rng(rng_seed)
    noisy = base + rng.standard_normal((h, w, 3)) * spec.noise_sigma
    rgb = np.clip(np.rint(noisy), 0, 255).astype(np.uint8)

    return SyntheticScene(
        rgb=RgbImage(rgb),
        depth=DepthMap(depth.astype(np.float32)),
        truth=FreeSpaceMask(truth),
        spec=spec,
    )


def make_random_scene(rng_seed: int, n_boxes: int = None,
                      base: SceneSpec = SceneSpec()) -> SceneSpec:
    """Randomized corridor: 1-3 boxes placed on the floor, palette colors."""
    rng = np.random.default_rng(rng_seed)
    if n_boxes is None:
        n_boxes = int(rng.integers(1, 4))
    order = rng.permutation(len(BOX_PALETTE))
    boxes = []
    for i in range(n_boxes):
        bw = float(rng.uniform(0.3, 0.6))
        bd = float(rng.uniform(0.3, 0.55))
        bh = float(rng.uniform(0.35, 0.9))
        margin = base.wall_gap - bw / 2.0 - 0.15
        bx = float(rng.uniform(-margin, margin))
        # keep boxes inside the walled section so they never reach the
        # depth of the far floor plateau
        z_lo = 0.55 + bd / 2.0
        z_hi = max(z_lo + 0.05, base.wall_z1 - 0.1 - bd / 2.0)
        bz = float(rng.uniform(z_lo, z_hi))
        boxes.append(Box(bx, bz, bw, bd, bh, BOX_PALETTE[order[i % len(order)]]))
    return replace(base, boxes=tuple(boxes))
