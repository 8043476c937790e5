"""Training harness over otdrimg image datasets.

Consumes the dataset toolkit only through its documented file interfaces:
reads `manifest.csv` + PNGs, writes prediction CSVs and per-epoch accuracy
curves, and scores results by invoking the `otdrimg score` command.

Submodules are imported explicitly (`train_harness.runner` pulls in the
deep-learning stack; `train_harness.manifest` stays lightweight).
"""

__version__ = "0.1.0"
