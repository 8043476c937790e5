"""Command-line front end: transform, demo, score and inspect-mat.

Exit codes: 0 on success, 1 when some samples failed but the batch
completed, 2 on fatal configuration or I/O errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .encodings import RpConfig
from .evalkit import compute_metrics, read_predictions, write_metrics
from .ingest import EVENT_NAMES, IngestConfig, MatFormatError, scan_mat
from .pipeline import PipelineConfig, demo_synthetic, read_manifest, run_batch


def _parse_resolution(text: str) -> tuple[int, int]:
    try:
        h, _, w = text.lower().partition("x")
        return int(h), int(w)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"resolution must look like 224x224: {exc}")


def _parse_ratios(text: str) -> tuple[float, float, float]:
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("ratios must be three comma-separated numbers")
    return tuple(parts)  # type: ignore[return-value]


def _discover_sources(input_dir: Path) -> dict[str, list[Path]]:
    """Event subdirectories, or top-level files named after their event."""
    sources: dict[str, list[Path]] = {}
    for event in EVENT_NAMES:
        found: list[Path] = []
        subdir = input_dir / event
        if subdir.is_dir():
            found += sorted(p for p in subdir.iterdir() if p.suffix.lower() in (".mat", ".csv"))
        found += sorted(
            p
            for p in input_dir.glob(f"{event}*")
            if p.is_file() and p.suffix.lower() in (".mat", ".csv")
        )
        if found:
            sources[event] = found
    if not sources:
        raise ValueError(
            f"{input_dir}: no event inputs found (expected per-event subdirectories "
            f"or files named after {', '.join(EVENT_NAMES)})"
        )
    return sources


def _add_pipeline_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--out", type=Path, required=True, help="output dataset directory")
    sub.add_argument("--paa-len", type=int, default=500)
    group = sub.add_mutually_exclusive_group()
    group.add_argument("--rp-percentile", type=float, default=None,
                       help="recurrence threshold as a pairwise-distance percentile (default 10)")
    group.add_argument("--rp-epsilon", type=float, default=None,
                       help="fixed recurrence distance threshold")
    sub.add_argument("--resolution", type=_parse_resolution, default=(224, 224),
                     metavar="HxW")
    sub.add_argument("--workers", type=int, default=0, help="0 = one per CPU")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--split", choices=("holdout", "kfold"), default="holdout")
    sub.add_argument("--ratios", type=_parse_ratios, default=(0.70, 0.15, 0.15),
                     metavar="TRAIN,VAL,TEST")
    sub.add_argument("--folds", type=int, default=5)


def _config_from_args(args, ingest: IngestConfig | None) -> PipelineConfig:
    if args.rp_epsilon is not None:
        rp = RpConfig(percentile=None, epsilon=args.rp_epsilon)
    else:
        rp = RpConfig(percentile=args.rp_percentile if args.rp_percentile is not None else 10.0)
    return PipelineConfig(
        out_dir=args.out,
        ingest=ingest,
        paa_length=args.paa_len,
        rp=rp,
        out_height=args.resolution[0],
        out_width=args.resolution[1],
        split_scheme=args.split,
        ratios=args.ratios,
        folds=args.folds,
        seed=args.seed,
        workers=args.workers,
    )


def _cmd_transform(args) -> int:
    ingest = IngestConfig(
        sources=_discover_sources(args.input),
        mat_variable={"*": args.mat_variable} if args.mat_variable else {},
        transpose=args.transpose,
    )
    manifest, stats = run_batch(_config_from_args(args, ingest))
    print(
        f"transformed {stats.samples_processed} samples "
        f"({stats.samples_failed} failed) -> {args.out}"
    )
    print(f"compression ratio {stats.compression_ratio:.4f} "
          f"({stats.output_bytes}/{stats.input_bytes} bytes)")
    return 1 if stats.samples_failed else 0


def _cmd_demo(args) -> int:
    config = _config_from_args(args, None)
    manifest, stats = demo_synthetic(config, n_per_class=args.n_per_class)
    print(f"demo dataset: {len(manifest.rows)} samples -> {args.out}")
    return 1 if stats.samples_failed else 0


def _cmd_score(args) -> int:
    preds = read_predictions(args.predictions)
    if args.manifest is not None:
        manifest = read_manifest(args.manifest)
        truth = {row.sample_id: row.label for row in manifest.rows}
        unknown = [sid for sid in preds.sample_ids if sid not in truth]
        if unknown:
            raise ValueError(
                f"{len(unknown)} predicted sample_ids missing from manifest, "
                f"first: {unknown[0]}"
            )
        for sid, true_label in zip(preds.sample_ids, preds.true_labels):
            if truth[sid] != int(true_label):
                raise ValueError(
                    f"{sid}: true label {int(true_label)} disagrees with "
                    f"manifest label {truth[sid]}"
                )
    report = compute_metrics(preds)
    write_metrics(report, sys.stdout)
    if args.out is not None:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            write_metrics(report, fh)
    return 0


def _cmd_inspect_mat(args) -> int:
    for var in scan_mat(args.path):
        dims = "x".join(str(d) for d in var.shape)
        status = "ok" if var.data is not None else f"skipped: {var.note}"
        print(f"{var.name}  {var.mat_class}  {dims}  {status}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="otdrimg",
        description="Phase-OTDR time series -> GASF/GADF/RP RGB image datasets",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    transform = subs.add_parser("transform", help="transform measurement files")
    transform.add_argument("--input", type=Path, required=True,
                           help="directory of per-event .mat/.csv inputs")
    transform.add_argument("--mat-variable", default=None,
                           help="only decode this MAT variable name")
    transform.add_argument("--transpose", action="store_true",
                           help="accept 10000x12 matrices by transposing")
    _add_pipeline_flags(transform)
    transform.set_defaults(func=_cmd_transform)

    demo = subs.add_parser("demo", help="generate and transform the synthetic demo set")
    demo.add_argument("--n-per-class", type=int, default=10)
    _add_pipeline_flags(demo)
    demo.set_defaults(func=_cmd_demo)

    score = subs.add_parser("score", help="score a prediction CSV")
    score.add_argument("--predictions", type=Path, required=True)
    score.add_argument("--manifest", type=Path, default=None,
                       help="cross-check ids and true labels against a manifest")
    score.add_argument("--out", type=Path, default=None,
                       help="also write the metrics document here")
    score.set_defaults(func=_cmd_score)

    inspect = subs.add_parser("inspect-mat", help="list variables of a MAT file")
    inspect.add_argument("--path", type=Path, required=True)
    inspect.set_defaults(func=_cmd_inspect_mat)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (MatFormatError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
