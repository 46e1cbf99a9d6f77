"""Command line interface.

    trainkit init-backbone --out backbone.pt [--seed N] [--depth N]
    trainkit dump    --images DIR --out DIR [--backbone FILE]
    trainkit train   --images DIR --masks DIR [--config FILE] [--out DIR]
    trainkit predict --ckpt FILE --image FILE --out FILE

Exit codes follow the segmentation pipeline's convention: 0 success,
1 partial or per-item failure, 2 unusable configuration.
"""

import argparse
import sys
from pathlib import Path

from . import backbone, segmodel, train
from .errors import CheckpointError, ConfigError, DataError, PairingError, TrainkitError

DEFAULT_BACKBONE = "backbone.pt"


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="trainkit",
        description="Feature dumping and segmenter fine-tuning over NPY/PNG files",
    )
    sub = p.add_subparsers(dest="command", required=True)

    ib = sub.add_parser("init-backbone", help="create a seeded token-encoder checkpoint")
    ib.add_argument("--out", required=True, help="checkpoint file to write")
    ib.add_argument("--seed", type=int, default=0)
    ib.add_argument("--depth", type=int, default=2,
                    help="encoder blocks including the dropped final one")

    dp = sub.add_parser("dump", help="dump (577, 1024) token features per image")
    dp.add_argument("--images", required=True, help="directory of input images")
    dp.add_argument("--out", required=True, help="directory for .feat.npy files")
    dp.add_argument("--backbone", default=DEFAULT_BACKBONE,
                    help=f"token-encoder checkpoint (default {DEFAULT_BACKBONE})")

    tr = sub.add_parser("train", help="fine-tune the two-class segmenter")
    tr.add_argument("--images", required=True, help="directory of training images")
    tr.add_argument("--masks", required=True, help="directory of same-stem mask PNGs")
    tr.add_argument("--config", default=None, help="JSON file of training options")
    tr.add_argument("--out", default="run",
                    help="output directory for checkpoint.pt and metrics.csv")

    pr = sub.add_parser("predict", help="write a binary mask for one image")
    pr.add_argument("--ckpt", required=True, help="segmenter checkpoint")
    pr.add_argument("--image", required=True, help="input image")
    pr.add_argument("--out", required=True, help="mask PNG to write")
    return p


def _cmd_init_backbone(args) -> int:
    model = backbone.init_backbone(seed=args.seed, depth=args.depth)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    backbone.save_backbone(model, out)
    print(f"wrote backbone checkpoint to {out} (seed {args.seed}, depth {args.depth})")
    return 0


def _cmd_dump(args) -> int:
    written, skipped = backbone.dump_features(args.images, args.out, args.backbone)
    total = written + skipped
    print(f"wrote {written}/{total} feature files to {args.out}")
    return 1 if skipped else 0


def _cmd_train(args) -> int:
    cfg = train.config_from_json(args.config) if args.config else train.TrainRunConfig()
    summary = train.finetune(args.images, args.masks, cfg, args.out)
    print(
        f"trained {summary['epochs_run']} epochs on {summary['train_pairs']} pairs "
        f"(batch {summary['batch_used']}); best val IoU {summary['best_val_iou']:.4f} "
        f"at epoch {summary['best_epoch']}"
    )
    print(f"checkpoint: {summary['checkpoint']}")
    print(f"metrics:    {summary['metrics']}")
    return 0


def _cmd_predict(args) -> int:
    mask = segmodel.predict_file(args.ckpt, args.image, args.out)
    free = float(mask.mean())
    print(f"wrote mask to {args.out} ({free:.1%} free)")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "init-backbone": _cmd_init_backbone,
        "dump": _cmd_dump,
        "train": _cmd_train,
        "predict": _cmd_predict,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, CheckpointError, PairingError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (DataError, TrainkitError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
