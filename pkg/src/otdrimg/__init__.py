"""otdrimg: Phase-OTDR time series to GASF/GADF/RP RGB image datasets.

Library layout:
  encodings  — series rescaling, polar encoding, GASF/GADF/RP/PAA kernels
  imaging    — grayscale quantization, grid/RGB assembly, deterministic PNG
  ingest     — MAT level-5 subset parser and CSV fallback -> RawSample
  evalkit    — seeded stratified splits, confusion-matrix metrics
  pipeline   — batch orchestration, manifests, stats, synthetic demo data
  cli        — `otdrimg` command-line front end
"""

from .pipeline import TOOL_VERSION as __version__  # noqa: F401

from . import cli, encodings, evalkit, imaging, ingest, pipeline  # noqa: F401
