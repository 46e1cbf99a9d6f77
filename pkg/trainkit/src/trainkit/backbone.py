"""Dense token feature extraction.

A ViT encoder turns an RGB image into a (577, 1024) float32 token matrix:
one global token plus a 24x24 patch grid at 1024 channels. 577 tokens only
fall out of one preprocessing size for a patch-16 model, 384x384, so that
resolution is pinned here and recorded in the dump metadata; consumers can
check it instead of guessing.

Features are taken from the penultimate encoder block: the final block is
built but never run, trading the most task-specific layer for features that
keep more spatial detail.

No pretrained weights ship with this package. `init_backbone` draws a fresh,
seeded initialization; the checkpoint file is the identity of the extractor,
and dumps are reproducible only against the same checkpoint.
"""

import json
import sys
from pathlib import Path

import numpy as np
import torch
from transformers import ViTConfig, ViTModel

from .data import list_images, load_rgb
from .errors import CheckpointError, ConfigError, DataError

RESOLUTION = 384  # (384 / 16)^2 + 1 = 577 tokens; no other size gives that count
PATCH_SIZE = 16
FEATURE_DIM = 1024
TOKEN_COUNT = (RESOLUTION // PATCH_SIZE) ** 2 + 1

# plain [-1, 1] scaling; recorded in dump metadata alongside the resolution
NORM_MEAN = 0.5
NORM_STD = 0.5

_FORMAT = "trainkit-backbone-v1"


def _config(depth: int) -> ViTConfig:
    return ViTConfig(
        image_size=RESOLUTION,
        patch_size=PATCH_SIZE,
        hidden_size=FEATURE_DIM,
        num_hidden_layers=depth,
        num_attention_heads=16,
        intermediate_size=4 * FEATURE_DIM,
    )


def init_backbone(seed: int = 0, depth: int = 2) -> ViTModel:
    """Build a seeded, randomly initialized token encoder.

    depth counts encoder blocks including the dropped final one, so it must
    be at least 2 for the penultimate tap to be a real block output.
    """
    if depth < 2:
        raise ConfigError("backbone depth must be >= 2 (the last block is dropped)")
    torch.manual_seed(seed)
    model = ViTModel(_config(depth), add_pooling_layer=False)
    model.eval()
    return model


def save_backbone(model: ViTModel, path) -> None:
    p = Path(path)
    if not p.parent.is_dir():
        raise CheckpointError(f"parent directory does not exist: {p.parent}")
    torch.save(
        {
            "format": _FORMAT,
            "depth": model.config.num_hidden_layers,
            "resolution": RESOLUTION,
            "patch_size": PATCH_SIZE,
            "state": model.state_dict(),
        },
        p,
    )


def load_backbone(path) -> ViTModel:
    p = Path(path)
    if not p.is_file():
        raise CheckpointError(f"backbone checkpoint not found: {p}")
    try:
        blob = torch.load(p, map_location="cpu", weights_only=True)
    except Exception as e:
        raise CheckpointError(f"cannot read backbone checkpoint {p}: {e}") from e
    if not isinstance(blob, dict) or blob.get("format") != _FORMAT:
        raise CheckpointError(f"not a backbone checkpoint: {p}")
    model = ViTModel(_config(int(blob["depth"])), add_pooling_layer=False)
    model.load_state_dict(blob["state"])
    model.eval()
    return model


def _preprocess(rgb: np.ndarray) -> torch.Tensor:
    # dtype conversion forces a copy, so PIL's read-only buffers are fine
    x = torch.from_numpy(np.ascontiguousarray(rgb, dtype=np.float32))
    x = x.permute(2, 0, 1) / 255.0
    x = (x - NORM_MEAN) / NORM_STD
    x = torch.nn.functional.interpolate(
        x.unsqueeze(0),
        size=(RESOLUTION, RESOLUTION),
        mode="bilinear",
        align_corners=False,
    )
    return x


def extract_tokens(model: ViTModel, rgb: np.ndarray) -> np.ndarray:
    """Run the encoder and return the penultimate block's tokens.

    rgb is (H, W, 3) uint8 at any resolution; output is (577, 1024) float32.
    """
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise DataError(f"expected (H, W, 3) RGB, got shape {rgb.shape}")
    with torch.no_grad():
        out = model(_preprocess(rgb), output_hidden_states=True)
    # hidden_states[0] is the embedding output; [-1] is the final block,
    # which exists but is deliberately unused
    tokens = out.hidden_states[-2][0]
    arr = np.ascontiguousarray(tokens.numpy(), dtype=np.float32)
    if arr.shape != (TOKEN_COUNT, FEATURE_DIM):
        raise CheckpointError(f"encoder produced {arr.shape}, expected "
                              f"({TOKEN_COUNT}, {FEATURE_DIM})")
    return arr


def dump_features(images_dir, out_dir, backbone_path) -> tuple[int, int]:
    """Dump one `<stem>.feat.npy` per readable image.

    Undecodable images are skipped with a warning on stderr. Returns
    (written, skipped). `dump_meta.json` in the output directory records the
    pinned preprocessing so readers never have to reverse-engineer it.
    """
    model = load_backbone(backbone_path)
    images = list_images(images_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    written = 0
    skipped = 0
    for path in images:
        try:
            rgb = load_rgb(path)
        except DataError as e:
            print(f"warning: skipping {path.name}: {e}", file=sys.stderr)
            skipped += 1
            continue
        tokens = extract_tokens(model, rgb)
        np.save(out / f"{path.stem}.feat.npy", tokens)
        written += 1

    meta = {
        "input_resolution": [RESOLUTION, RESOLUTION],
        "patch_size": PATCH_SIZE,
        "token_count": TOKEN_COUNT,
        "feature_dim": FEATURE_DIM,
        "normalize_mean": NORM_MEAN,
        "normalize_std": NORM_STD,
        "backbone_depth": model.config.num_hidden_layers,
        "files_written": written,
    }
    (out / "dump_meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    return written, skipped
