"""IoU arithmetic and batch report plumbing."""

import csv
import json

import numpy as np
import pytest

from freespace import evaluate
from freespace.errors import DimensionMismatch, EmptyBatch, MissingPair
from freespace.io import save_mask
from freespace.types import FreeSpaceMask


def _mask(rows):
    return FreeSpaceMask(np.asarray(rows, dtype=bool))


def test_iou_arithmetic():
    a = _mask([[1, 1, 0, 0]])
    b = _mask([[0, 1, 1, 0]])
    assert evaluate.iou(a, b) == pytest.approx(1 / 3)


def test_iou_identical_and_disjoint():
    a = _mask([[1, 0], [0, 1]])
    assert evaluate.iou(a, a) == 1.0
    b = _mask([[0, 1], [1, 0]])
    assert evaluate.iou(a, b) == 0.0


def test_iou_both_empty_is_perfect():
    a = _mask(np.zeros((3, 3)))
    assert evaluate.iou(a, a) == 1.0


def test_iou_one_empty_is_zero():
    a = _mask(np.zeros((3, 3)))
    b = _mask(np.ones((3, 3)))
    assert evaluate.iou(a, b) == 0.0


def test_iou_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        evaluate.iou(_mask(np.zeros((2, 2))), _mask(np.zeros((2, 3))))


def _save(tmp_path, sub, stem, arr):
    d = tmp_path / sub
    d.mkdir(exist_ok=True)
    save_mask(FreeSpaceMask(arr.astype(bool)), d / f"{stem}.png")


def test_evaluate_batch_means_per_stem(tmp_path):
    half = np.zeros((4, 4))
    half[:, :2] = 1
    _save(tmp_path, "pred", "a", half)
    _save(tmp_path, "truth", "a", half)
    _save(tmp_path, "pred", "b", half)
    full = np.ones((4, 4))
    _save(tmp_path, "truth", "b", full)
    rep = evaluate.evaluate_batch(tmp_path / "pred", tmp_path / "truth")
    assert [s for s, _ in rep.per_image] == ["a", "b"]
    ious = dict(rep.per_image)
    assert ious["a"] == 1.0 and ious["b"] == pytest.approx(0.5)
    assert rep.mean_iou == pytest.approx(0.75)
    assert len(rep.params_digest) == 16


def test_evaluate_batch_missing_pair(tmp_path):
    m = np.ones((2, 2))
    _save(tmp_path, "pred", "a", m)
    _save(tmp_path, "truth", "a", m)
    _save(tmp_path, "pred", "only_pred", m)
    with pytest.raises(MissingPair, match="only_pred"):
        evaluate.evaluate_batch(tmp_path / "pred", tmp_path / "truth")


def test_evaluate_batch_empty(tmp_path):
    (tmp_path / "pred").mkdir()
    (tmp_path / "truth").mkdir()
    with pytest.raises(EmptyBatch):
        evaluate.evaluate_batch(tmp_path / "pred", tmp_path / "truth")


def test_digest_is_order_insensitive_and_stable():
    d1 = evaluate.digest_params({"a": 1, "b": [2, 3]})
    d2 = evaluate.digest_params({"b": [2, 3], "a": 1})
    assert d1 == d2 and len(d1) == 16
    assert d1 != evaluate.digest_params({"a": 1, "b": [2, 4]})


def test_report_writers(tmp_path):
    rep = evaluate.EvalReport(
        per_image=(("a", 0.5), ("b", 1.0)), mean_iou=0.75, params_digest="feed")
    jpath = tmp_path / "r.json"
    evaluate.write_report_json(rep, jpath)
    payload = json.loads(jpath.read_text(encoding="utf-8"))
    assert payload["mean_iou"] == 0.75
    assert payload["per_image"] == [
        {"id": "a", "iou": 0.5}, {"id": "b", "iou": 1.0}]
    assert payload["params_digest"] == "feed"

    cpath = tmp_path / "r.csv"
    evaluate.write_report_csv(rep, cpath)
    rows = list(csv.reader(cpath.open(encoding="utf-8")))
    assert rows[0] == ["id", "iou"]
    assert rows[1] == ["a", "0.500000"]
    assert rows[-1] == ["mean", "0.750000"]
