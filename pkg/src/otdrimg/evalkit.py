"""Deterministic dataset splitting and classification metrics.

Splits are stratified per class and fully determined by a 64-bit seed: ids
are sorted, shuffled by a splitmix64-driven Fisher-Yates pass (one stream
per class, seeded with `seed XOR (label+1)*0x9E3779B97F4A7C15 mod 2^64`),
then cut at the cumulative ratio boundaries (holdout) or dealt round-robin
(k-fold). Sorting first makes the assignment independent of input order.

Metrics are macro-averaged (unweighted mean over the classes present in
the true labels); support-weighted averages are reported alongside since
they cost nothing. Prediction files are CSV with header
`sample_id,true_label,pred_label`, UTF-8, LF line endings; metric reports
serialize as flat key=value text (see docs/formats.md).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

N_CLASSES = 6

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

PREDICTIONS_HEADER = "sample_id,true_label,pred_label"


class StratificationError(ValueError):
    """A class is empty (holdout) or smaller than k (k-fold)."""


class LabelRangeError(ValueError):
    """A label falls outside 0..5."""


class SplitMix64:
    """splitmix64 PRNG; ~10 lines, identical across languages."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return (z ^ (z >> 31)) & _MASK64


def _shuffled_class_ids(ids: list[str], label: int, seed: int) -> list[str]:
    """Sorted ids, Fisher-Yates shuffled by the class's splitmix64 stream."""
    order = sorted(ids)
    rng = SplitMix64(seed ^ ((label + 1) * _GOLDEN & _MASK64))
    for i in range(len(order) - 1, 0, -1):
        j = rng.next() % (i + 1)
        order[i], order[j] = order[j], order[i]
    return order


def _group_by_label(ids_with_labels) -> dict[int, list[str]]:
    groups: dict[int, list[str]] = {}
    seen = set()
    for sample_id, label in ids_with_labels:
        if sample_id in seen:
            raise ValueError(f"duplicate sample_id {sample_id!r}")
        seen.add(sample_id)
        groups.setdefault(int(label), []).append(sample_id)
    if not groups:
        raise StratificationError("no samples to split")
    return groups


@dataclass(frozen=True)
class SplitAssignment:
    """Maps every sample_id to 'train'/'val'/'test' or 'fold0'..'fold{k-1}'."""

    assignments: dict[str, str]
    scheme: str  # "holdout" or "kfold"
    seed: int
    ratios: tuple[float, float, float] | None = None
    folds: int | None = None

    def subset(self, name: str) -> list[str]:
        return sorted(i for i, s in self.assignments.items() if s == name)


def split_holdout(
    ids_with_labels,
    ratios: tuple[float, float, float] = (0.70, 0.15, 0.15),
    seed: int = 0,
) -> SplitAssignment:
    """Stratified train/val/test split.

    Within each class the shuffled ids are cut at floor(n*r_train) and
    floor(n*(r_train+r_val)); the remainder drifts to later subsets, so
    per-class sizes stay within one sample of the exact proportions.
    """
    if len(ratios) != 3 or any(r <= 0 for r in ratios):
        raise ValueError(f"ratios must be three positive numbers, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {sum(ratios)}")
    groups = _group_by_label(ids_with_labels)
    assignments: dict[str, str] = {}
    for label in sorted(groups):
        order = _shuffled_class_ids(groups[label], label, seed)
        n = len(order)
        cut1 = int(np.floor(n * ratios[0]))
        cut2 = int(np.floor(n * (ratios[0] + ratios[1])))
        for sid in order[:cut1]:
            assignments[sid] = "train"
        for sid in order[cut1:cut2]:
            assignments[sid] = "val"
        for sid in order[cut2:]:
            assignments[sid] = "test"
    return SplitAssignment(assignments, "holdout", seed, ratios=tuple(ratios))


def split_kfold(ids_with_labels, k: int = 5, seed: int = 0) -> SplitAssignment:
    """Stratified k-fold partition: shuffle per class, deal round-robin."""
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    groups = _group_by_label(ids_with_labels)
    assignments: dict[str, str] = {}
    for label in sorted(groups):
        if len(groups[label]) < k:
            raise StratificationError(
                f"class {label} has {len(groups[label])} samples, fewer than k={k}"
            )
        order = _shuffled_class_ids(groups[label], label, seed)
        for i, sid in enumerate(order):
            assignments[sid] = f"fold{i % k}"
    return SplitAssignment(assignments, "kfold", seed, folds=k)


@dataclass(frozen=True)
class PredictionSet:
    """(sample_id, true_label, predicted_label) rows for scoring."""

    sample_ids: tuple[str, ...]
    true_labels: np.ndarray
    pred_labels: np.ndarray

    def __post_init__(self):
        if not (len(self.sample_ids) == self.true_labels.size == self.pred_labels.size):
            raise ValueError("sample_ids/true/pred lengths differ")
        if len(set(self.sample_ids)) != len(self.sample_ids):
            raise ValueError("sample_ids are not unique")

    def __len__(self) -> int:
        return len(self.sample_ids)


def prediction_set(rows) -> PredictionSet:
    """Build a PredictionSet from (sample_id, true, pred) triples."""
    rows = list(rows)
    ids = tuple(r[0] for r in rows)
    true = np.asarray([int(r[1]) for r in rows], dtype=np.int64)
    pred = np.asarray([int(r[2]) for r in rows], dtype=np.int64)
    return PredictionSet(ids, true, pred)


def write_predictions(preds: PredictionSet, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(PREDICTIONS_HEADER + "\n")
        for sid, t, p in zip(preds.sample_ids, preds.true_labels, preds.pred_labels):
            fh.write(f"{sid},{int(t)},{int(p)}\n")


def read_predictions(path) -> PredictionSet:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != PREDICTIONS_HEADER:
        raise ValueError(f"{path}: first line must be '{PREDICTIONS_HEADER}'")
    rows = []
    for ln, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise ValueError(f"{path}:{ln}: expected 3 fields, got {len(parts)}")
        try:
            rows.append((parts[0], int(parts[1]), int(parts[2])))
        except ValueError as exc:
            raise ValueError(f"{path}:{ln}: {exc}") from exc
    return prediction_set(rows)


@dataclass(frozen=True)
class MetricsReport:
    """Accuracy plus macro- and support-weighted sensitivity/precision/F1.

    confusion[i, j] counts samples with true label i predicted as j.
    Macro averages run over the classes present in the true labels only.
    """

    accuracy: float
    macro_sensitivity: float
    macro_precision: float
    macro_f1: float
    weighted_sensitivity: float
    weighted_precision: float
    weighted_f1: float
    confusion: np.ndarray  # (6, 6) int64
    n_samples: int

    SCALARS = (
        "accuracy",
        "macro_sensitivity",
        "macro_precision",
        "macro_f1",
        "weighted_sensitivity",
        "weighted_precision",
        "weighted_f1",
    )


def compute_metrics(preds: PredictionSet) -> MetricsReport:
    """Score predictions against true labels.

    Per-class sensitivity (recall) is TP/(TP+FN) and precision TP/(TP+FP),
    0 when the denominator is 0; F1 is 2PR/(P+R), 0 when P+R=0. Classes
    absent from the true labels are excluded from the averages.
    """
    if len(preds) == 0:
        raise ValueError("empty prediction set")
    true, pred = preds.true_labels, preds.pred_labels
    for name, arr in (("true", true), ("pred", pred)):
        bad = (arr < 0) | (arr >= N_CLASSES)
        if bad.any():
            raise LabelRangeError(
                f"{name} label {int(arr[bad][0])} outside 0..{N_CLASSES - 1}"
            )
    confusion = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    np.add.at(confusion, (true, pred), 1)

    support = confusion.sum(axis=1)
    present = support > 0
    tp = np.diag(confusion).astype(np.float64)
    fn = support - tp
    fp = confusion.sum(axis=0) - tp
    with np.errstate(divide="ignore", invalid="ignore"):
        recall = np.where(tp + fn > 0, tp / (tp + fn), 0.0)
        precision = np.where(tp + fp > 0, tp / (tp + fp), 0.0)
        pr = precision + recall
        f1 = np.where(pr > 0, 2.0 * precision * recall / np.where(pr > 0, pr, 1.0), 0.0)

    supported = support[present].astype(np.float64)
    total_support = supported.sum()
    return MetricsReport(
        accuracy=float(tp.sum() / len(preds)),
        macro_sensitivity=float(recall[present].mean()),
        macro_precision=float(precision[present].mean()),
        macro_f1=float(f1[present].mean()),
        weighted_sensitivity=float(recall[present] @ supported / total_support),
        weighted_precision=float(precision[present] @ supported / total_support),
        weighted_f1=float(f1[present] @ supported / total_support),
        confusion=confusion,
        n_samples=len(preds),
    )


def aggregate_folds(reports: list[MetricsReport]) -> dict[str, tuple[float, float]]:
    """Mean and population (divide-by-N) standard deviation per scalar metric."""
    if not reports:
        raise ValueError("no reports to aggregate")
    out = {}
    for name in MetricsReport.SCALARS:
        values = np.asarray([getattr(r, name) for r in reports], dtype=np.float64)
        out[name] = (float(values.mean()), float(values.std()))
    return out


def write_metrics(report: MetricsReport, fh) -> None:
    """Serialize a report as flat key=value lines (see docs/formats.md)."""
    for name in MetricsReport.SCALARS:
        fh.write(f"{name}={getattr(report, name)!r}\n")
    fh.write(f"n_samples={report.n_samples}\n")
    for i in range(N_CLASSES):
        for j in range(N_CLASSES):
            fh.write(f"confusion_{i}_{j}={int(report.confusion[i, j])}\n")


def read_metrics(path) -> dict[str, float]:
    """Parse a key=value metrics document into a flat dict."""
    out: dict[str, float] = {}
    for ln, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"{path}:{ln}: expected key=value, got {line!r}")
        out[key] = float(value)
    return out
