"""Stratified splitting and metric scoring without any training.

Builds a labelled id set shaped like the published class census, splits it
70/15/15 and 5-fold, then scores a simulated classifier (90% correct, the
rest confused into a neighbouring class) to show the metrics report and
the cross-fold aggregation.
"""

import numpy as np

from otdrimg.evalkit import (
    aggregate_folds,
    compute_metrics,
    prediction_set,
    split_holdout,
    split_kfold,
    write_metrics,
)
import sys

CENSUS = {0: 3094, 1: 2512, 2: 2530, 3: 2298, 4: 2728, 5: 2450}
ids_with_labels = [
    (f"ev{label}_{i:05d}", label) for label, n in CENSUS.items() for i in range(n)
]
print(f"{len(ids_with_labels)} ids across {len(CENSUS)} classes")

holdout = split_holdout(ids_with_labels, seed=1)
for name in ("train", "val", "test"):
    print(f"  holdout {name}: {len(holdout.subset(name))}")

kfold = split_kfold(ids_with_labels, k=5, seed=1)
sizes = [len(kfold.subset(f"fold{f}")) for f in range(5)]
print(f"  fold sizes: {sizes} (sum {sum(sizes)})")

# simulate a 90%-accurate classifier on the test subset of each fold
rng = np.random.default_rng(0)
label_of = dict(ids_with_labels)
fold_reports = []
for f in range(5):
    rows = []
    for sid in kfold.subset(f"fold{f}"):
        true = label_of[sid]
        pred = true if rng.random() < 0.9 else (true + 1) % 6
        rows.append((sid, true, pred))
    fold_reports.append(compute_metrics(prediction_set(rows)))

print("\nfold 0 report:")
write_metrics(fold_reports[0], sys.stdout)

print("\nacross folds (mean, population std):")
for metric, (mean, std) in aggregate_folds(fold_reports).items():
    print(f"  {metric}: {mean:.4f} +- {std:.4f}")
