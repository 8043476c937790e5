"""Experiment runner: train one configuration, or five folds, and emit
prediction files the dataset toolkit's `score` command accepts.

The fold/holdout assignment is always consumed from the manifest's split
column — never recomputed here — so the split stays single-sourced. For
k-fold runs a stratified tenth of the training folds is carved out as the
validation set (seeded), since cross-validation leaves no dedicated val
split for best-epoch selection.
"""

from __future__ import annotations

import logging
import math
import shutil
import subprocess
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .manifest import DataError, Manifest, ManifestEntry, load_images, read_manifest
from .models import SUPPORTED_MODELS, SpecError, build_classifier, preprocess_for

logger = logging.getLogger(__name__)

PREDICTIONS_HEADER = "sample_id,true_label,pred_label"
EPOCHS_HEADER = "epoch,train_acc,val_acc"

SCALAR_METRICS = (
    "accuracy",
    "macro_sensitivity",
    "macro_precision",
    "macro_f1",
    "weighted_sensitivity",
    "weighted_precision",
    "weighted_f1",
)


@dataclass(frozen=True)
class ExperimentSpec:
    """One training configuration.

    learning_rate defaults to 1e-4 when fine-tuning and 1e-3 when the
    backbone is frozen (head-only training); epochs/batch size follow the
    declared defaults and are freely overridable.
    """

    model: str
    trainable: bool
    manifest_path: Path
    out_dir: Path
    epochs: int = 30
    batch_size: int = 32
    learning_rate: float | None = None
    early_stop_patience: int = 5
    weights: str = "auto"  # imagenet | none | auto
    seed: int = 0

    def __post_init__(self):
        if self.model not in SUPPORTED_MODELS:
            raise SpecError(f"unknown model {self.model!r}; supported: {SUPPORTED_MODELS}")
        if self.epochs < 1 or self.batch_size < 1:
            raise SpecError("epochs and batch_size must be >= 1")

    @property
    def lr(self) -> float:
        if self.learning_rate is not None:
            return self.learning_rate
        return 1e-4 if self.trainable else 1e-3


@dataclass(frozen=True)
class RunResult:
    prediction_files: dict[str, Path]  # split name -> PredictionSet CSV
    epochs_file: Path
    best_val_accuracy: float
    test_accuracy: float
    weights_used: str
    wall_seconds: float


class _BestValWeights:
    """Keras callback: remember the weights of the best val-accuracy epoch
    and restore them when training ends."""

    def __init__(self):
        import keras

        class _Callback(keras.callbacks.Callback):
            def __init__(cb_self):
                super().__init__()
                cb_self.best = -math.inf
                cb_self.best_weights = None

            def on_epoch_end(cb_self, epoch, logs=None):
                value = (logs or {}).get("val_accuracy")
                if value is not None and value > cb_self.best:
                    cb_self.best = value
                    cb_self.best_weights = cb_self.model.get_weights()

            def on_train_end(cb_self, logs=None):
                if cb_self.best_weights is not None:
                    cb_self.model.set_weights(cb_self.best_weights)

        self.callback = _Callback()

    @property
    def best(self) -> float:
        return float(self.callback.best)


def write_prediction_file(path: Path, ids, true_labels, pred_labels) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(PREDICTIONS_HEADER + "\n")
        for sid, t, p in zip(ids, true_labels, pred_labels):
            fh.write(f"{sid},{int(t)},{int(p)}\n")


def _write_epoch_curve(path: Path, history) -> None:
    train_acc = history.history.get("accuracy", [])
    val_acc = history.history.get("val_accuracy", [])
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(EPOCHS_HEADER + "\n")
        for epoch, (tr, va) in enumerate(zip(train_acc, val_acc), start=1):
            fh.write(f"{epoch},{tr!r},{va!r}\n")


def _fit_and_predict(
    spec: ExperimentSpec,
    train_set: list[ManifestEntry],
    val_set: list[ManifestEntry],
    eval_sets: dict[str, list[ManifestEntry]],
    out_dir: Path,
) -> RunResult:
    import keras

    t0 = time.perf_counter()
    keras.utils.set_random_seed(spec.seed)
    out_dir.mkdir(parents=True, exist_ok=True)

    pre = preprocess_for(spec.model)
    x_train, y_train, _ = load_images(train_set)
    x_val, y_val, _ = load_images(val_set)

    model, weights_used = build_classifier(spec.model, spec.trainable, spec.weights)
    model.compile(
        optimizer=keras.optimizers.Adam(spec.lr),
        loss="sparse_categorical_crossentropy",
        metrics=["accuracy"],
    )
    logger.info(
        "training %s trainable=%s weights=%s lr=%g epochs=%d batch=%d "
        "train=%d val=%d",
        spec.model, spec.trainable, weights_used, spec.lr, spec.epochs,
        spec.batch_size, len(train_set), len(val_set),
    )

    best = _BestValWeights()
    stopper = keras.callbacks.EarlyStopping(
        monitor="val_accuracy", patience=spec.early_stop_patience
    )
    history = model.fit(
        pre(x_train.astype("float32")),
        y_train,
        validation_data=(pre(x_val.astype("float32")), y_val),
        epochs=spec.epochs,
        batch_size=spec.batch_size,
        callbacks=[best.callback, stopper],
        verbose=0,
    )
    epochs_file = out_dir / "epochs.csv"
    _write_epoch_curve(epochs_file, history)

    prediction_files: dict[str, Path] = {}
    test_accuracy = float("nan")
    for split_name, entries in eval_sets.items():
        x, y, ids = load_images(entries)
        predicted = model.predict(pre(x.astype("float32")), batch_size=spec.batch_size,
                                  verbose=0).argmax(axis=1)
        path = out_dir / f"predictions_{split_name}.csv"
        write_prediction_file(path, ids, y, predicted)
        prediction_files[split_name] = path
        if split_name == "test":
            test_accuracy = float((predicted == y).mean())

    return RunResult(
        prediction_files=prediction_files,
        epochs_file=epochs_file,
        best_val_accuracy=best.best,
        test_accuracy=test_accuracy,
        weights_used=weights_used,
        wall_seconds=time.perf_counter() - t0,
    )


def train(spec: ExperimentSpec, manifest: Manifest | None = None) -> RunResult:
    """Train on the manifest's train split, select best-val weights, and
    emit prediction files for the val and test splits."""
    mf = manifest if manifest is not None else read_manifest(spec.manifest_path)
    for needed in ("train", "val", "test"):
        if not mf.subset(needed):
            raise DataError(f"manifest has no '{needed}' split; found {sorted(mf.splits())}")
    return _fit_and_predict(
        spec,
        train_set=mf.subset("train"),
        val_set=mf.subset("val"),
        eval_sets={"val": mf.subset("val"), "test": mf.subset("test")},
        out_dir=Path(spec.out_dir),
    )


def _carve_validation(
    entries: list[ManifestEntry], fraction: float, seed: int
) -> tuple[list[ManifestEntry], list[ManifestEntry]]:
    """Deterministic stratified split of the CV training folds."""
    rng = np.random.default_rng(seed)
    by_label: dict[int, list[ManifestEntry]] = {}
    for entry in sorted(entries, key=lambda e: e.sample_id):
        by_label.setdefault(entry.label, []).append(entry)
    train_out, val_out = [], []
    for label in sorted(by_label):
        group = by_label[label]
        order = rng.permutation(len(group))
        n_val = max(1, int(len(group) * fraction))
        chosen = set(order[:n_val].tolist())
        for i, entry in enumerate(group):
            (val_out if i in chosen else train_out).append(entry)
    return train_out, val_out


def run_cv(spec: ExperimentSpec, manifest: Manifest | None = None,
           val_fraction: float = 0.1) -> tuple[list[RunResult], dict[str, tuple[float, float]]]:
    """Train once per fold (fold f = test set) and aggregate scored metrics.

    Every fold's predictions are scored through the dataset toolkit's
    `score` command; the aggregate is the per-metric mean and population
    standard deviation across folds.
    """
    mf = manifest if manifest is not None else read_manifest(spec.manifest_path)
    folds = mf.fold_names()
    if len(folds) < 2:
        raise DataError(f"manifest carries no k-fold assignment; splits: {sorted(mf.splits())}")

    results = []
    metric_files = []
    for fold in folds:
        test_set = mf.subset(fold)
        rest = [e for e in mf.entries if e.split != fold]
        train_set, val_set = _carve_validation(rest, val_fraction, spec.seed)
        fold_dir = Path(spec.out_dir) / fold
        result = _fit_and_predict(
            spec,
            train_set=train_set,
            val_set=val_set,
            eval_sets={"test": test_set},
            out_dir=fold_dir,
        )
        metrics_path = fold_dir / "metrics.txt"
        score_with_primary(result.prediction_files["test"], spec.manifest_path, metrics_path)
        metric_files.append(metrics_path)
        results.append(result)
    return results, aggregate_metric_files(metric_files)


def score_with_primary(predictions: Path, manifest_path: Path, out: Path) -> None:
    """Score a prediction file via the dataset toolkit's CLI."""
    exe = shutil.which("otdrimg")
    cmd = [exe] if exe else [sys.executable, "-m", "otdrimg.cli"]
    cmd += [
        "score",
        "--predictions", str(predictions),
        "--manifest", str(manifest_path),
        "--out", str(out),
    ]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(
            f"otdrimg score failed ({proc.returncode}): {proc.stderr.strip()}"
        )


def read_metric_file(path) -> dict[str, float]:
    out = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            key, _, value = line.partition("=")
            out[key] = float(value)
    return out


def aggregate_metric_files(paths) -> dict[str, tuple[float, float]]:
    """Mean and population standard deviation per scalar metric."""
    docs = [read_metric_file(p) for p in paths]
    out = {}
    for name in SCALAR_METRICS:
        values = np.asarray([doc[name] for doc in docs], dtype=np.float64)
        out[name] = (float(values.mean()), float(values.std()))
    return out
