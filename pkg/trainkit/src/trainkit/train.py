"""Fine-tuning loop for the two-class segmenter.

Training consumes (image, mask) pairs matched by stem, holds out a seeded
validation split, and logs one `epoch,train_loss,val_iou` row per epoch.
Early stopping watches validation IoU; the checkpoint written at the end is
the best validation epoch, not the last one.
"""

import csv
import dataclasses
import json
import random
import warnings
from pathlib import Path

import numpy as np
import torch

from . import segmodel
from .data import discover_pairs, iou, load_mask, load_rgb, split_pairs
from .errors import ConfigError

METRICS_HEADER = ["epoch", "train_loss", "val_iou"]


@dataclasses.dataclass(frozen=True)
class TrainRunConfig:
    epochs: int = 50
    batch_size: int = 16
    learning_rate: float = 0.01
    weight_decay: float = 5e-4
    input_size: int = 224
    val_fraction: float = 0.2
    patience: int = 10  # epochs without val_iou improvement before stopping
    min_delta: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError(f"epochs must be positive, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be positive, got {self.batch_size}")
        if not self.learning_rate > 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if not self.weight_decay > 0:
            raise ConfigError(f"weight_decay must be positive, got {self.weight_decay}")
        if self.input_size < 1:
            raise ConfigError(f"input_size must be positive, got {self.input_size}")
        if self.input_size != segmodel.INPUT_SIZE:
            raise ConfigError(
                f"input_size must be {segmodel.INPUT_SIZE} (square, fixed by the model)"
            )
        if not 0 < self.val_fraction < 1:
            raise ConfigError(f"val_fraction must be in (0, 1), got {self.val_fraction}")
        if self.patience < 1:
            raise ConfigError(f"patience must be positive, got {self.patience}")
        if self.min_delta < 0:
            raise ConfigError(f"min_delta must be >= 0, got {self.min_delta}")
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")


def config_from_json(path) -> TrainRunConfig:
    """Load a TrainRunConfig from a JSON object; unknown keys are errors."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        raw = json.loads(p.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot parse config JSON {p}: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError(f"config must be a JSON object, got {type(raw).__name__}")
    known = {f.name for f in dataclasses.fields(TrainRunConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {unknown}")
    try:
        return TrainRunConfig(**raw)
    except TypeError as e:
        raise ConfigError(f"bad config: {e}") from e


def _batches(n: int, batch: int, rng: random.Random):
    order = list(range(n))
    rng.shuffle(order)
    for start in range(0, n, batch):
        yield order[start : start + batch]


def finetune(images_dir, masks_dir, cfg: TrainRunConfig, out_dir) -> dict:
    """Train on paired images/masks; write checkpoint.pt and metrics.csv.

    Returns a summary dict with the paths, the effective batch size, the
    number of epochs actually run, and the best validation IoU.
    """
    pairs = discover_pairs(images_dir, masks_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    images = {stem: load_rgb(ip) for stem, ip, _ in pairs}
    masks = {stem: load_mask(mp) for stem, _, mp in pairs}
    if all(not m.any() for m in masks.values()) or all(m.all() for m in masks.values()):
        warnings.warn("dataset is single-class: every mask is entirely one label")

    train_pairs, val_pairs = split_pairs(pairs, cfg.val_fraction, cfg.seed)
    batch = min(cfg.batch_size, len(train_pairs))

    model = segmodel.build_segmenter(cfg.seed)
    xs = torch.stack([segmodel.preprocess(images[s]) for s, _, _ in train_pairs])
    ys = torch.stack([segmodel.mask_to_label(masks[s]) for s, _, _ in train_pairs])

    opt = torch.optim.SGD(
        model.parameters(), lr=cfg.learning_rate, weight_decay=cfg.weight_decay
    )
    rng = random.Random(cfg.seed)

    metrics_path = out / "metrics.csv"
    ckpt_path = out / "checkpoint.pt"
    rows = []
    best_iou = -1.0
    best_state = None
    best_epoch = 0
    stale = 0

    for epoch in range(1, cfg.epochs + 1):
        model.train()
        total = 0.0
        seen = 0
        for idx in _batches(len(train_pairs), batch, rng):
            opt.zero_grad()
            out_step = model(pixel_values=xs[idx], labels=ys[idx])
            out_step.loss.backward()
            opt.step()
            total += float(out_step.loss.detach()) * len(idx)
            seen += len(idx)
        train_loss = total / seen

        model.eval()
        val_scores = [
            iou(segmodel.predict_mask(model, images[s]), masks[s])
            for s, _, _ in val_pairs
        ]
        val_iou = float(np.mean(val_scores))
        rows.append((epoch, train_loss, val_iou))

        if val_iou > best_iou + cfg.min_delta:
            best_iou = val_iou
            best_epoch = epoch
            best_state = {k: v.detach().clone() for k, v in model.state_dict().items()}
            stale = 0
        else:
            stale += 1
            if stale >= cfg.patience:
                break

    if best_state is not None:
        model.load_state_dict(best_state)
    with open(metrics_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(METRICS_HEADER)
        for epoch, loss, vi in rows:
            w.writerow([epoch, f"{loss:.6f}", f"{vi:.6f}"])
    segmodel.save_segmenter(
        model,
        ckpt_path,
        extra={
            "best_epoch": best_epoch,
            "best_val_iou": best_iou,
            "epochs_run": len(rows),
            "seed": cfg.seed,
        },
    )
    return {
        "checkpoint": str(ckpt_path),
        "metrics": str(metrics_path),
        "batch_used": batch,
        "epochs_run": len(rows),
        "best_epoch": best_epoch,
        "best_val_iou": best_iou,
        "train_pairs": len(train_pairs),
        "val_pairs": len(val_pairs),
    }
