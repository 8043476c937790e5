"""Ingestion formats: the CSV fallback round trip and MAT inspection.

Writes one synthetic measurement in the plain-text fallback format, parses
it back bit-exactly, and — when a .mat path is passed on the command line —
lists that file's variables the way `otdrimg inspect-mat` does.
"""

import sys
from pathlib import Path

import numpy as np

from otdrimg.ingest import RawSample, parse_csv_fallback, scan_mat, write_csv_fallback

out_dir = Path(__file__).parent / "out" / "ingest"
out_dir.mkdir(parents=True, exist_ok=True)

rng = np.random.default_rng(5)
sample = RawSample("Watering_demo_0", rng.normal(size=(12, 10_000)), 3)

csv_path = out_dir / "Watering_demo.csv"
write_csv_fallback([sample], csv_path)
print(f"wrote {csv_path} ({csv_path.stat().st_size:,} bytes)")

back = parse_csv_fallback(csv_path, "Watering")
identical = bool(np.array_equal(back[0].regions, sample.regions))
print(f"parsed back {len(back)} sample(s); value-identical round trip: {identical}")

if len(sys.argv) > 1:
    mat_path = Path(sys.argv[1])
    print(f"\nvariables in {mat_path}:")
    for var in scan_mat(mat_path):
        dims = "x".join(str(d) for d in var.shape)
        status = "ok" if var.data is not None else f"skipped: {var.note}"
        print(f"  {var.name}  {var.mat_class}  {dims}  {status}")
else:
    print("\npass a .mat path to list its variables, e.g.:")
    print(f"  python {Path(__file__).name} measurements/Background_1.mat")
