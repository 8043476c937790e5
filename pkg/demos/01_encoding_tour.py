"""Tour of the three series-to-matrix encodings on a single signal.

Walks one noisy sinusoid through the full per-region chain — min-max
rescale, PAA downsample, polar encoding, then GASF / GADF / RP — and saves
each encoding as a grayscale PNG next to this script.
"""

from pathlib import Path

import numpy as np

from otdrimg.encodings import (
    RpConfig,
    gadf,
    gasf,
    generate_sinusoid,
    paa,
    recurrence_plot,
    rescale_minmax,
    to_polar,
)
from otdrimg.imaging import fuse_rgb, matrix_to_gray, write_png

out_dir = Path(__file__).parent / "out" / "encoding_tour"
out_dir.mkdir(parents=True, exist_ok=True)

# a 6 Hz tone with mild noise, 10 s at 1 kHz: same length as one fiber region
signal = generate_sinusoid(4.0, 6.0, duration=10.0, sample_rate=1000.0,
                           noise_sigma=0.4, seed=7)
print(f"raw series: {signal.size} points, range [{signal.min():.2f}, {signal.max():.2f}]")

normalized = rescale_minmax(signal)
print(f"rescaled to [{normalized.min():.2f}, {normalized.max():.2f}]")

series = paa(normalized, 128)
print(f"PAA to {series.size} segment means (window of {signal.size // series.size})")

angles = to_polar(series)
print(f"polar angles span [{angles.min():.3f}, {angles.max():.3f}] rad")

encodings = {
    "gasf": gasf(angles),
    "gadf": gadf(angles),
    "rp": recurrence_plot(series, RpConfig(percentile=10.0)),
}
for name, matrix in encodings.items():
    gray = matrix_to_gray(matrix)
    # grayscale preview as an RGB file with three equal planes
    path = out_dir / f"{name}.png"
    write_png(fuse_rgb(gray, gray, gray), path)
    density = float((matrix.values != 0).mean())
    print(f"{name}: {matrix.n}x{matrix.n}, nonzero fraction {density:.2f} -> {path}")

print("\nGASF is symmetric, GADF antisymmetric, RP binary — compare the files.")
