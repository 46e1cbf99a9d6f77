"""Command-line interface.

Subcommands: maskgen, annotate, eval, synth, overlay. Exit codes: 0 on
success, 1 when any per-item failure occurred, 2 on unusable configuration
(argparse uses 2 for bad flags already).
"""

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import annotate as annotate_mod
from . import evaluate, io, synth
from .errors import ConfigError, DimensionMismatch, FreespaceError
from .pipeline import PipelineConfig, derive_seed, run_maskgen
from .types import RgbImage

OVERLAY_COLOR = (0, 200, 80)


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except FreespaceError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="freespace",
        description="Unsupervised indoor free-space segmentation from RGB-D pairs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    mg = sub.add_parser("maskgen", help="generate free-space masks for a directory")
    mg.add_argument("--rgb", required=True, help="directory of RGB PNG/PPM images")
    mg.add_argument("--depth", required=True,
                    help="directory of 16-bit depth PNGs (mm) or NPY (m) per stem")
    mg.add_argument("--out", required=True, help="output mask directory")
    mg.add_argument("--config", help="JSON pipeline config")
    mg.add_argument("--seed", type=int, help="global RNG seed")
    mg.add_argument("--k", type=int, help="cluster count override")
    mg.add_argument("--features", choices=["ingest", "fallback"],
                    help="feature source override")
    mg.add_argument("--feature-dir", help="directory of <stem>.feat.npy dumps")
    mg.add_argument("--grid", type=int, help="fallback feature grid side")
    mg.add_argument("--debug-json", action="store_true",
                    help="emit per-image diagnostics JSON and debug NPYs")
    mg.add_argument("--jobs", type=int, help="parallel workers (default: all cores)")
    mg.set_defaults(func=_cmd_maskgen)

    an = sub.add_parser("annotate", help="label frames positive/unlabeled from telemetry")
    an.add_argument("--log", required=True, help="telemetry CSV")
    an.add_argument("--frames", required=True, help="frame index CSV")
    an.add_argument("--out", required=True, help="output labels JSON")
    an.add_argument("--config", help="JSON pipeline config (annotate section)")
    an.set_defaults(func=_cmd_annotate)

    ev = sub.add_parser("eval", help="IoU of predicted masks against truth masks")
    ev.add_argument("--pred", required=True)
    ev.add_argument("--truth", required=True)
    ev.add_argument("--out-json", help="write the report as JSON")
    ev.add_argument("--out-csv", help="write the report as CSV")
    ev.set_defaults(func=_cmd_eval)

    sy = sub.add_parser("synth", help="generate synthetic corridor scenes")
    sy.add_argument("--out", required=True)
    sy.add_argument("--count", type=int, default=10)
    sy.add_argument("--seed", type=int, default=0)
    sy.set_defaults(func=_cmd_synth)

    ov = sub.add_parser("overlay", help="blend a mask over its image for inspection")
    ov.add_argument("--image", required=True)
    ov.add_argument("--mask", required=True)
    ov.add_argument("--out", required=True)
    ov.set_defaults(func=_cmd_overlay)
    return parser


def _load_config(args) -> PipelineConfig:
    cfg = (
        PipelineConfig.from_json_file(args.config)
        if getattr(args, "config", None)
        else PipelineConfig()
    )
    try:
        over = {}
        if getattr(args, "seed", None) is not None:
            over["seed"] = args.seed
        if getattr(args, "k", None) is not None:
            over["cluster"] = dataclasses.replace(cfg.cluster, k=args.k)
        if getattr(args, "features", None):
            over["feature_source"] = args.features
        if getattr(args, "feature_dir", None):
            over["feature_dir"] = args.feature_dir
        if getattr(args, "grid", None) is not None:
            over["feature_grid"] = args.grid
        if getattr(args, "debug_json", False):
            over["debug_json"] = True
        if getattr(args, "jobs", None) is not None:
            over["jobs"] = args.jobs
        elif not getattr(args, "config", None):
            over["jobs"] = os.cpu_count() or 1
        return dataclasses.replace(cfg, **over)
    except FreespaceError as e:
        raise ConfigError(str(e)) from e


def _cmd_maskgen(args) -> int:
    cfg = _load_config(args)
    results = run_maskgen(args.rgb, args.depth, args.out, cfg)
    failures = [(stem, err) for stem, err in results if err]
    for stem, err in failures:
        print(f"error: {stem}: {err}", file=sys.stderr)
    print(f"wrote {len(results) - len(failures)}/{len(results)} masks to {args.out}")
    return 1 if failures else 0


def _cmd_annotate(args) -> int:
    cfg = _load_config(args)
    log = annotate_mod.read_telemetry_csv(args.log)
    frames = annotate_mod.read_frames_csv(args.frames)
    labels = annotate_mod.label_frames(log, frames, cfg.annotate)
    annotate_mod.write_labels_json(labels, args.out)
    print(json.dumps(annotate_mod.split_report(labels)))
    return 0


def _cmd_eval(args) -> int:
    report = evaluate.evaluate_batch(args.pred, args.truth)
    if args.out_json:
        evaluate.write_report_json(report, args.out_json)
    if args.out_csv:
        evaluate.write_report_csv(report, args.out_csv)
    print(f"mean IoU over {len(report.per_image)} pairs: {report.mean_iou:.4f}")
    return 0


def _cmd_synth(args) -> int:
    out = Path(args.out)
    for sub_dir in ("rgb", "depth", "truth"):
        (out / sub_dir).mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        stem = f"scene_{i:04d}"
        spec = synth.make_random_scene(derive_seed(args.seed, stem))
        scene = synth.generate_scene(spec, derive_seed(args.seed, stem) + 1)
        io.save_image(scene.rgb, out / "rgb" / f"{stem}.png")
        io.save_depth_png(scene.depth, out / "depth" / f"{stem}.png")
        io.save_mask(scene.truth, out / "truth" / f"{stem}.png")
    print(f"wrote {args.count} scenes to {out}")
    return 0


def _cmd_overlay(args) -> int:
    img = io.load_image(args.image)
    mask = io.load_mask(args.mask)
    if img.data.shape[:2] != mask.data.shape:
        raise DimensionMismatch(
            f"image {img.data.shape[:2]} vs mask {mask.data.shape}"
        )
    blend = img.data.astype(np.float64)
    color = np.asarray(OVERLAY_COLOR, dtype=np.float64)
    blend[mask.data] = 0.5 * blend[mask.data] + 0.5 * color
    out = RgbImage(np.clip(np.rint(blend), 0, 255).astype(np.uint8))
    io.save_image(out, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
