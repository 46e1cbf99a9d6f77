"""Image, mask, depth, and NPY file I/O.

Formats are deliberately strict: masks are binary 8-bit PNG (0/255), depth
interchange is 16-bit gray PNG in millimeters or NPY float32 in meters, and
NPY is version 1.0 little-endian float32 C-order only. Anything else is
rejected loudly rather than coerced, so a probability map or a transposed
dump can never slip through as valid input.
"""

import ast
import struct
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import FormatError, IoError, ShapeError
from .types import DepthMap, FreeSpaceMask, RgbImage

_NPY_MAGIC = b"\x93NUMPY"

_16BIT_MODES = ("I", "I;16", "I;16B", "I;16L", "I;16N")


def _open_image(path) -> Image.Image:
    p = Path(path)
    if not p.is_file():
        raise IoError(f"no such file: {p}")
    try:
        img = Image.open(p)
        img.load()
    except UnidentifiedImageError as e:
        raise FormatError(f"not a decodable image: {p}") from e
    except OSError as e:
        raise IoError(f"cannot read {p}: {e}") from e
    return img


def load_image(path) -> RgbImage:
    """Load an 8-bit RGB image from PNG or PPM.

    Parameters
    ----------
    path : str or Path
        File to read.

    Returns
    -------
    RgbImage

    Raises
    ------
    IoError
        Missing or unreadable file.
    FormatError
        Undecodable file, unsupported container, or 16-bit samples.
    """
    img = _open_image(path)
    if img.format not in ("PNG", "PPM"):
        raise FormatError(f"unsupported image format {img.format!r}: {path}")
    if img.mode in _16BIT_MODES:
        raise FormatError(f"16-bit samples are not a color image: {path}")
    return RgbImage(np.asarray(img.convert("RGB"), dtype=np.uint8))


def load_depth(path) -> DepthMap:
    """Load depth in meters from 16-bit gray PNG (millimeters) or NPY float32.

    16-bit PNG values are divided by 1000; NPY values pass through.
    """
    p = Path(path)
    if p.suffix.lower() == ".npy":
        arr = read_npy(p)
        if arr.ndim != 2:
            raise ShapeError(f"depth NPY must be 2-D, got shape {arr.shape}")
        return DepthMap(arr.astype(np.float32))
    img = _open_image(p)
    if img.format != "PNG":
        raise FormatError(f"depth must be 16-bit PNG or NPY, got {img.format!r}")
    if img.mode not in _16BIT_MODES:
        raise FormatError(f"depth PNG must be 16-bit single-channel, got mode {img.mode!r}")
    raw = np.asarray(img)
    if raw.ndim != 2:
        raise ShapeError(f"depth PNG must be single-channel, got shape {raw.shape}")
    return DepthMap((raw.astype(np.float64) / 1000.0).astype(np.float32))


def save_depth_png(depth: DepthMap, path) -> None:
    """Write depth as 16-bit gray PNG in millimeters (rounded, saturating)."""
    mm = np.rint(np.nan_to_num(depth.data, nan=0.0, posinf=65.535, neginf=0.0) * 1000.0)
    mm = np.clip(mm, 0, 65535).astype(np.uint16)
    _save(Image.fromarray(mm), path)


def save_mask(mask: FreeSpaceMask, path) -> None:
    """Write a binary mask as 8-bit gray PNG, free = 255."""
    _save(Image.fromarray(mask.data.astype(np.uint8) * 255), path)


def load_mask(path) -> FreeSpaceMask:
    """Load a strictly binary 8-bit mask PNG; any value besides 0/255 is an error."""
    img = _open_image(path)
    if img.format != "PNG" or img.mode != "L":
        raise FormatError(f"mask must be 8-bit gray PNG: {path}")
    raw = np.asarray(img)
    bad = ~np.isin(raw, (0, 255))
    if bad.any():
        raise FormatError(
            f"mask is not binary: found value {int(raw[bad][0])} in {path}"
        )
    return FreeSpaceMask(raw == 255)


def save_image(img: RgbImage, path) -> None:
    """Write an 8-bit RGB PNG."""
    _save(Image.fromarray(img.data), path)


def _save(img: Image.Image, path) -> None:
    p = Path(path)
    if not p.parent.is_dir():
        raise IoError(f"parent directory does not exist: {p.parent}")
    try:
        img.save(p, format="PNG")
    except OSError as e:
        raise IoError(f"cannot write {p}: {e}") from e


def read_npy(path) -> np.ndarray:
    """Read an NPY v1.0 file of little-endian float32, C-order.

    Anything else (other versions, dtypes, Fortran order, truncated data)
    raises FormatError. Returns a float32 array of the stored shape.
    """
    p = Path(path)
    if not p.is_file():
        raise IoError(f"no such file: {p}")
    try:
        blob = p.read_bytes()
    except OSError as e:
        raise IoError(f"cannot read {p}: {e}") from e
    if len(blob) < 10 or blob[:6] != _NPY_MAGIC:
        raise FormatError(f"bad NPY magic: {p}")
    major, minor = blob[6], blob[7]
    if (major, minor) != (1, 0):
        raise FormatError(f"unsupported NPY version {major}.{minor}: {p}")
    (hlen,) = struct.unpack("<H", blob[8:10])
    header_end = 10 + hlen
    if len(blob) < header_end:
        raise FormatError(f"truncated NPY header: {p}")
    try:
        header = ast.literal_eval(blob[10:header_end].decode("latin1"))
    except (ValueError, SyntaxError) as e:
        raise FormatError(f"unparsable NPY header: {p}") from e
    descr = header.get("descr")
    if descr != "<f4":
        raise FormatError(f"NPY dtype must be little-endian float32, got {descr!r}: {p}")
    if header.get("fortran_order") is not False:
        raise FormatError(f"NPY must be C-order: {p}")
    shape = header.get("shape")
    if not isinstance(shape, tuple) or not all(
        isinstance(s, int) and s >= 0 for s in shape
    ):
        raise FormatError(f"bad NPY shape {shape!r}: {p}")
    count = int(np.prod(shape, dtype=np.int64)) if shape else 1
    data = blob[header_end:]
    if len(data) != count * 4:
        raise FormatError(
            f"NPY payload is {len(data)} bytes, expected {count * 4}: {p}"
        )
    arr = np.frombuffer(data, dtype="<f4").reshape(shape)
    return arr.copy()


def write_npy(arr: np.ndarray, path) -> None:
    """Write a float32 array as NPY v1.0, little-endian, C-order."""
    p = Path(path)
    if not p.parent.is_dir():
        raise IoError(f"parent directory does not exist: {p.parent}")
    a = np.ascontiguousarray(arr, dtype="<f4")
    header = {
        "descr": "<f4",
        "fortran_order": False,
        "shape": tuple(int(s) for s in a.shape),
    }
    body = (
        "{"
        + ", ".join(f"{k!r}: {v!r}" for k, v in header.items())
        + ", }"
    ).encode("latin1")
    # total of magic+version+len+header must be a multiple of 64, newline-terminated
    unpadded = 10 + len(body) + 1
    pad = (64 - unpadded % 64) % 64
    body += b" " * pad + b"\n"
    try:
        with open(p, "wb") as f:
            f.write(_NPY_MAGIC)
            f.write(bytes((1, 0)))
            f.write(struct.pack("<H", len(body)))
            f.write(body)
            f.write(a.tobytes(order="C"))
    except OSError as e:
        raise IoError(f"cannot write {p}: {e}") from e


def write_npy_int32(arr: np.ndarray, path) -> None:
    """Debug export: int32 NPY v1.0 (superpixel label rasters)."""
    p = Path(path)
    a = np.ascontiguousarray(arr, dtype="<i4")
    body = (
        "{"
        + ", ".join(
            f"{k!r}: {v!r}"
            for k, v in {
                "descr": "<i4",
                "fortran_order": False,
                "shape": tuple(int(s) for s in a.shape),
            }.items()
        )
        + ", }"
    ).encode("latin1")
    unpadded = 10 + len(body) + 1
    pad = (64 - unpadded % 64) % 64
    body += b" " * pad + b"\n"
    try:
        with open(p, "wb") as f:
            f.write(_NPY_MAGIC)
            f.write(bytes((1, 0)))
            f.write(struct.pack("<H", len(body)))
            f.write(body)
            f.write(a.tobytes(order="C"))
    except OSError as e:
        raise IoError(f"cannot write {p}: {e}") from e
