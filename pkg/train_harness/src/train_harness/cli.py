"""Minimal CLI: run one experiment (or a 5-fold sweep) over a manifest."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="train-harness",
        description="fine-tune or feature-extract a CNN over an otdrimg dataset",
    )
    parser.add_argument("--manifest", type=Path, required=True)
    parser.add_argument("--out", type=Path, required=True)
    parser.add_argument("--model", default="EfficientNetB0")
    parser.add_argument("--trainable", action="store_true",
                        help="fine-tune the backbone (default: frozen feature extractor)")
    parser.add_argument("--epochs", type=int, default=30)
    parser.add_argument("--batch-size", type=int, default=32)
    parser.add_argument("--lr", type=float, default=None)
    parser.add_argument("--weights", choices=("imagenet", "none", "auto"), default="auto")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--cv", action="store_true",
                        help="run once per manifest fold instead of train/val/test")
    args = parser.parse_args(argv)

    from .models import SpecError
    from .manifest import DataError
    from .runner import ExperimentSpec, run_cv, score_with_primary, train

    spec = ExperimentSpec(
        model=args.model,
        trainable=args.trainable,
        manifest_path=args.manifest,
        out_dir=args.out,
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        weights=args.weights,
        seed=args.seed,
    )
    try:
        if args.cv:
            results, aggregate = run_cv(spec)
            for fold, result in enumerate(results):
                print(f"fold{fold}: test acc {result.test_accuracy:.4f} "
                      f"({result.wall_seconds:.0f} s, weights={result.weights_used})")
            for metric, (mean, std) in aggregate.items():
                print(f"{metric}: {mean:.4f} +- {std:.4f}")
        else:
            result = train(spec)
            print(f"best val acc {result.best_val_accuracy:.4f}, "
                  f"test acc {result.test_accuracy:.4f} "
                  f"({result.wall_seconds:.0f} s, weights={result.weights_used})")
            metrics_path = Path(args.out) / "metrics.txt"
            score_with_primary(result.prediction_files["test"], args.manifest, metrics_path)
            print(f"scored -> {metrics_path}")
    except (SpecError, DataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
