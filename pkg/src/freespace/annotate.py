"""Positive-unlabeled frame annotation from robot telemetry.

A frame is positive when, over the whole window centered on its timestamp,
the robot demonstrably traversed freely: all four wheels at speed, a
forward or turning command active, and no laser return inside the
clearance radius. Everything else stays unlabeled (never negative).
"""

import csv
import json
from bisect import bisect_left, bisect_right
from pathlib import Path

import numpy as np

from .errors import EmptyLog, FormatError, IoError, UnsortedLog
from .types import AnnotationParams, FrameIndex, LabelSet, TelemetryRecord

TELEMETRY_HEADER = ["t", "v_fl", "v_fr", "v_rl", "v_rr", "cmd_lin", "cmd_ang", "laser_min"]
FRAMES_HEADER = ["frame_id", "t"]


def label_frames(log: list, frames: list, p: AnnotationParams) -> LabelSet:
    """Split frames into positive / unlabeled.

    The closed window [t - w/2, t + w/2] must lie inside the log span and
    contain at least two records; every record in it must satisfy:
      (a) min wheel |speed| >= v_thresh,
      (b) cmd_lin > 0, or cmd_lin >= 0 with |cmd_ang| >= ang_min,
      (c) laser_min > laser_clear.
    """
    if not log:
        raise EmptyLog("telemetry log has no records")
    ts = [r.t for r in log]
    if any(a >= b for a, b in zip(ts, ts[1:])):
        raise UnsortedLog("timestamps must be strictly increasing")

    arr = np.array(
        [[r.v_fl, r.v_fr, r.v_rl, r.v_rr, r.cmd_lin, r.cmd_ang, r.laser_min] for r in log],
        dtype=np.float64,
    )
    wheel_ok = np.abs(arr[:, 0:4]).min(axis=1) >= p.v_thresh
    moving_ok = (arr[:, 4] > 0) | ((arr[:, 4] >= 0) & (np.abs(arr[:, 5]) >= p.ang_min))
    laser_ok = arr[:, 6] > p.laser_clear
    record_ok = wheel_ok & moving_ok & laser_ok

    half = p.window / 2.0
    positive = []
    unlabeled = []
    for fr in frames:
        lo = fr.t - half
        hi = fr.t + half
        if lo < ts[0] or hi > ts[-1]:
            unlabeled.append(fr.frame_id)
            continue
        i0 = bisect_left(ts, lo)
        i1 = bisect_right(ts, hi)
        if i1 - i0 < 2:
            unlabeled.append(fr.frame_id)
            continue
        if record_ok[i0:i1].all():
            positive.append(fr.frame_id)
        else:
            unlabeled.append(fr.frame_id)
    return LabelSet(positive=tuple(positive), unlabeled=tuple(unlabeled))


def split_report(labels: LabelSet) -> dict:
    npos = len(labels.positive)
    nunl = len(labels.unlabeled)
    total = npos + nunl
    return {
        "positive": npos,
        "unlabeled": nunl,
        "total": total,
        "positive_ratio": (npos / total) if total else 0.0,
    }


def read_telemetry_csv(path) -> list:
    rows = _read_csv(path, TELEMETRY_HEADER)
    try:
        return [TelemetryRecord(*(float(row[c]) for c in TELEMETRY_HEADER)) for row in rows]
    except ValueError as e:
        raise FormatError(f"non-numeric telemetry value in {path}: {e}") from e


def read_frames_csv(path) -> list:
    rows = _read_csv(path, FRAMES_HEADER)
    try:
        return [FrameIndex(row["frame_id"], float(row["t"])) for row in rows]
    except ValueError as e:
        raise FormatError(f"non-numeric frame timestamp in {path}: {e}") from e


def _read_csv(path, expected_header) -> list:
    p = Path(path)
    if not p.is_file():
        raise IoError(f"no such file: {p}")
    with open(p, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != expected_header:
            raise FormatError(
                f"{p} header is {reader.fieldnames}, expected {expected_header}"
            )
        return list(reader)


def write_labels_json(labels: LabelSet, path) -> None:
    payload = {"positive": list(labels.positive), "unlabeled": list(labels.unlabeled)}
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
