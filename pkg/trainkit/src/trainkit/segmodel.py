"""Two-class segmentation model: build, checkpoint, predict.

The architecture is a hierarchical-transformer encoder with a lightweight
MLP decode head (SegFormer-B0 dimensions), built with a two-class head in
place of the stock classifier. Pretrained encoder weights are not available
in this environment, so models start from a seeded random initialization;
what matters downstream is the relative gain from fine-tuning, and the
checkpoint file fully identifies the weights either way.
"""

from pathlib import Path

import numpy as np
import torch
from transformers import SegformerConfig, SegformerForSemanticSegmentation

from .data import load_rgb, save_mask
from .errors import CheckpointError, DataError

INPUT_SIZE = 224
# channel statistics used for both training and inference preprocessing
MEAN = (0.485, 0.456, 0.406)
STD = (0.229, 0.224, 0.225)

_FORMAT = "trainkit-segmenter-v1"


def build_segmenter(seed: int = 0) -> SegformerForSemanticSegmentation:
    """Fresh two-class segmenter with a seeded random initialization."""
    torch.manual_seed(seed)
    cfg = SegformerConfig(num_labels=2)
    model = SegformerForSemanticSegmentation(cfg)
    model.eval()
    return model


def save_segmenter(model, path, extra: dict | None = None) -> None:
    p = Path(path)
    if not p.parent.is_dir():
        raise CheckpointError(f"parent directory does not exist: {p.parent}")
    blob = {
        "format": _FORMAT,
        "config": model.config.to_dict(),
        "state": model.state_dict(),
    }
    if extra:
        blob["extra"] = dict(extra)
    torch.save(blob, p)


def load_segmenter(path) -> SegformerForSemanticSegmentation:
    p = Path(path)
    if not p.is_file():
        raise CheckpointError(f"checkpoint not found: {p}")
    try:
        blob = torch.load(p, map_location="cpu", weights_only=True)
    except Exception as e:
        raise CheckpointError(f"cannot read checkpoint {p}: {e}") from e
    if not isinstance(blob, dict) or blob.get("format") != _FORMAT:
        raise CheckpointError(f"not a segmenter checkpoint: {p}")
    model = SegformerForSemanticSegmentation(SegformerConfig.from_dict(blob["config"]))
    model.load_state_dict(blob["state"])
    model.eval()
    return model


def preprocess(rgb: np.ndarray) -> torch.Tensor:
    """(H, W, 3) uint8 -> normalized (3, 224, 224) float tensor."""
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise DataError(f"expected (H, W, 3) RGB, got shape {rgb.shape}")
    x = torch.from_numpy(np.ascontiguousarray(rgb, dtype=np.float32))
    x = x.permute(2, 0, 1) / 255.0
    x = torch.nn.functional.interpolate(
        x.unsqueeze(0),
        size=(INPUT_SIZE, INPUT_SIZE),
        mode="bilinear",
        align_corners=False,
    )[0]
    mean = torch.tensor(MEAN).view(3, 1, 1)
    std = torch.tensor(STD).view(3, 1, 1)
    return (x - mean) / std


def mask_to_label(mask: np.ndarray) -> torch.Tensor:
    """(H, W) bool -> (224, 224) long tensor, nearest-neighbor resampled."""
    t = torch.from_numpy(np.asarray(mask, dtype=np.uint8))[None, None].float()
    t = torch.nn.functional.interpolate(t, size=(INPUT_SIZE, INPUT_SIZE), mode="nearest")
    return (t[0, 0] > 0.5).long()


def predict_mask(model, rgb: np.ndarray) -> np.ndarray:
    """Argmax mask at the input image's resolution.

    Logits come out at the model's low-resolution stride and are bilinearly
    upsampled to (H, W) before the argmax, so boundaries land where the
    continuous scores cross rather than on a blocky grid.
    """
    h, w = rgb.shape[:2]
    model.eval()
    with torch.no_grad():
        logits = model(pixel_values=preprocess(rgb).unsqueeze(0)).logits
        logits = torch.nn.functional.interpolate(
            logits, size=(h, w), mode="bilinear", align_corners=False
        )
        labels = logits.argmax(dim=1)[0]
    return labels.numpy().astype(bool)


def predict_file(ckpt_path, image_path, out_path) -> np.ndarray:
    """CLI-shaped predict: checkpoint + image file in, binary mask PNG out."""
    model = load_segmenter(ckpt_path)
    rgb = load_rgb(image_path)
    mask = predict_mask(model, rgb)
    save_mask(mask, out_path)
    return mask
