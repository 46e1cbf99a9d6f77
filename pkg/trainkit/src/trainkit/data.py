"""File I/O and dataset pairing.

The mask format deliberately mirrors the segmentation pipeline's interchange
contract: 8-bit gray PNG with values exactly 0 or 255, free space = 255.
Anything looser (a probability map, an RGBA export) is rejected instead of
coerced, so a bad file fails here and not three stages later.
"""

import random
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DataError, PairingError

IMAGE_SUFFIXES = (".png", ".ppm")


def load_rgb(path) -> np.ndarray:
    """Load an image as (H, W, 3) uint8. Raises DataError on anything unreadable."""
    p = Path(path)
    if not p.is_file():
        raise DataError(f"no such image: {p}")
    try:
        img = Image.open(p)
        img.load()
    except (UnidentifiedImageError, OSError) as e:
        raise DataError(f"cannot decode image {p}: {e}") from e
    return np.asarray(img.convert("RGB"), dtype=np.uint8)


def load_mask(path) -> np.ndarray:
    """Load a strictly binary mask PNG as a bool (H, W) array."""
    p = Path(path)
    if not p.is_file():
        raise DataError(f"no such mask: {p}")
    try:
        img = Image.open(p)
        img.load()
    except (UnidentifiedImageError, OSError) as e:
        raise DataError(f"cannot decode mask {p}: {e}") from e
    if img.format != "PNG" or img.mode != "L":
        raise DataError(f"mask must be 8-bit gray PNG: {p}")
    raw = np.asarray(img)
    bad = ~np.isin(raw, (0, 255))
    if bad.any():
        raise DataError(f"mask is not binary: found value {int(raw[bad][0])} in {p}")
    return raw == 255


def save_mask(mask: np.ndarray, path) -> None:
    """Write a bool (H, W) array as binary 8-bit gray PNG, free = 255."""
    p = Path(path)
    if not p.parent.is_dir():
        raise DataError(f"parent directory does not exist: {p.parent}")
    arr = np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(p, format="PNG")


def list_images(directory) -> list[Path]:
    d = Path(directory)
    if not d.is_dir():
        raise DataError(f"not a directory: {d}")
    return sorted(p for p in d.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)


def discover_pairs(images_dir, masks_dir) -> list[tuple[str, Path, Path]]:
    """Match images to same-stem mask PNGs.

    Returns (stem, image_path, mask_path) triples sorted by stem. Every image
    must have a mask and vice versa; any one-sided stem is a PairingError.
    """
    images = {p.stem: p for p in list_images(images_dir)}
    md = Path(masks_dir)
    if not md.is_dir():
        raise DataError(f"not a directory: {md}")
    masks = {p.stem: p for p in sorted(md.glob("*.png"))}
    only_img = sorted(set(images) - set(masks))
    only_mask = sorted(set(masks) - set(images))
    if only_img or only_mask:
        raise PairingError(
            f"unpaired stems: images without masks {only_img}, "
            f"masks without images {only_mask}"
        )
    if not images:
        raise PairingError(f"no image/mask pairs under {images_dir}")
    return [(stem, images[stem], masks[stem]) for stem in sorted(images)]


def split_pairs(pairs: list, val_fraction: float, seed: int) -> tuple[list, list]:
    """Seeded shuffle-split into (train, validation).

    Validation gets round(n * val_fraction) items, clamped so that training
    keeps at least one pair. A single-pair dataset validates on its own
    training pair rather than on nothing.
    """
    order = list(pairs)
    random.Random(seed).shuffle(order)
    if len(order) < 2:
        return list(order), list(order)
    n_val = int(round(len(order) * val_fraction))
    n_val = max(1, min(n_val, len(order) - 1))
    return order[n_val:], order[:n_val]


def iou(pred: np.ndarray, ref: np.ndarray) -> float:
    """Intersection over union of two bool masks; two empty masks count as 1."""
    a = np.asarray(pred, dtype=bool)
    b = np.asarray(ref, dtype=bool)
    if a.shape != b.shape:
        raise DataError(f"mask shapes differ: {a.shape} vs {b.shape}")
    union = np.logical_or(a, b).sum()
    if union == 0:
        return 1.0
    return float(np.logical_and(a, b).sum() / union)
