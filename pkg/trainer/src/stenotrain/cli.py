"""Command-line entry points: ``train`` and ``grad-check``.

Exit codes: 0 success; 2 configuration or dataset problems; 3 weight-file
problems; 4 failures inside the optimization (for example a non-finite
loss); grad-check additionally exits 1 when the gradient error exceeds
the acceptance bound.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .errors import (ConfigError, DatasetError, TrainerError, TrainingError,
                     WeightFormatError)
from .gradcheck import GRADIENT_BOUND, tiny_constrained_check
from .model import CONSTRAINT_MODES
from .specs import PRESETS
from .train import TrainConfig, train


def _parse_split(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(
            "split must be three comma-separated fractions, e.g. 0.8,0.1,0.1")
    try:
        return tuple(float(p) for p in parts)  # type: ignore[return-value]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def cmd_train(args: argparse.Namespace) -> int:
    cfg = TrainConfig(
        learning_rate=args.lr,
        batch_size=args.batch,
        eval_batch_size=args.eval_batch,
        split=args.split,
        patience=args.patience,
        min_delta=args.min_delta,
        max_epochs=args.epochs,
        constraint=args.constraint,
        xi=args.xi,
        preset=args.preset,
        seed=args.seed,
        normalize_velocity=args.normalize_velocity,
        device=args.device,
        workers=args.workers,
    )
    result = train(args.data, args.out, cfg, log=print)
    if result.test_mse is not None:
        print(f"test MSE {result.test_mse:.6e}")
    return 0


def cmd_grad_check(args: argparse.Namespace) -> int:
    report = tiny_constrained_check(args.seed, args.mode)
    print(f"parameters:     {report['parameters']}")
    print(f"mode:           {report['mode']}")
    print(f"max rel error:  {report['max_rel_error']:.3e}")
    if report["max_rel_error"] > GRADIENT_BOUND:
        print(f"FAILED: above the {GRADIENT_BOUND:g} bound", file=sys.stderr)
        return 1
    print(f"ok (bound {GRADIENT_BOUND:g})")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stenotrain",
        description="Offline training of subdomain flow networks.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train on a directory of pairs")
    p.add_argument("--data", required=True,
                   help="directory of training pairs")
    p.add_argument("--out", default="train_out",
                   help="run directory for weights, curves, manifest")
    p.add_argument("--constraint", choices=CONSTRAINT_MODES,
                   default="flow-rate-conserving")
    p.add_argument("--preset", choices=tuple(PRESETS), default="default")
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--batch", type=int, default=64)
    p.add_argument("--eval-batch", dest="eval_batch", type=int, default=32)
    p.add_argument("--split", type=_parse_split, default=(0.8, 0.1, 0.1))
    p.add_argument("--patience", type=int, default=50)
    p.add_argument("--min-delta", dest="min_delta", type=float, default=1e-7)
    p.add_argument("--epochs", type=int, default=400)
    p.add_argument("--xi", type=int, default=None,
                   help="expected band width (checked against the dataset)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--normalize-velocity", action="store_true")
    p.add_argument("--device", default="cpu")
    p.add_argument("--workers", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("grad-check",
                       help="validate gradients on a tiny constrained network")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=CONSTRAINT_MODES,
                   default="flow-rate-conserving")
    p.set_defaults(func=cmd_grad_check)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DatasetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (WeightFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (TrainingError, TrainerError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
