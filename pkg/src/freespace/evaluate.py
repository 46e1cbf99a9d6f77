"""IoU metric and batch evaluation reports."""

import csv
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, EmptyBatch, MissingPair
from .io import load_mask
from .types import FreeSpaceMask


@dataclass(frozen=True)
class EvalReport:
    per_image: tuple  # ((stem, iou), ...)
    mean_iou: float
    params_digest: str


def iou(a: FreeSpaceMask, b: FreeSpaceMask) -> float:
    """Intersection over union; two empty masks agree perfectly (1.0)."""
    if a.data.shape != b.data.shape:
        raise DimensionMismatch(f"{a.data.shape} vs {b.data.shape}")
    inter = int(np.logical_and(a.data, b.data).sum())
    union = int(np.logical_or(a.data, b.data).sum())
    if union == 0:
        return 1.0
    return inter / union


def evaluate_batch(pred_dir, truth_dir, params_digest: str = None) -> EvalReport:
    """IoU per matching stem plus the mean; unmatched stems are an error."""
    pred = {p.stem: p for p in sorted(Path(pred_dir).glob("*.png"))}
    truth = {p.stem: p for p in sorted(Path(truth_dir).glob("*.png"))}
    if not pred and not truth:
        raise EmptyBatch(f"no PNG files under {pred_dir} or {truth_dir}")
    missing = sorted(set(pred) ^ set(truth))
    if missing:
        raise MissingPair(f"stems without a partner: {', '.join(missing)}")
    per_image = []
    for stem in sorted(pred):
        per_image.append((stem, iou(load_mask(pred[stem]), load_mask(truth[stem]))))
    mean = float(np.mean([v for _, v in per_image]))
    if params_digest is None:
        params_digest = digest_params({"stems": sorted(pred)})
    return EvalReport(per_image=tuple(per_image), mean_iou=mean,
                      params_digest=params_digest)


def digest_params(params: dict) -> str:
    blob = json.dumps(params, sort_keys=True, default=str).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]


def write_report_json(report: EvalReport, path) -> None:
    payload = {
        "mean_iou": report.mean_iou,
        "params_digest": report.params_digest,
        "per_image": [{"id": s, "iou": v} for s, v in report.per_image],
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def write_report_csv(report: EvalReport, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["id", "iou"])
        for stem, v in report.per_image:
            writer.writerow([stem, f"{v:.6f}"])
        writer.writerow(["mean", f"{report.mean_iou:.6f}"])
