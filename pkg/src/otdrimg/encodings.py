"""Numerical kernels that turn a 1D intensity series into matrix encodings.

Three encodings are produced per series: the Gramian angular summation
field (GASF, cos of pairwise angle sums), the Gramian angular difference
field (GADF, sin of pairwise angle differences) and the binary recurrence
plot (RP, pairwise distances thresholded at epsilon). Series are min-max
rescaled to [-1, 1], optionally downsampled by piecewise aggregate
approximation (PAA), and polar-encoded via arccos before the angular
fields are formed.

All functions are pure and operate on 1D float64 numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

GASF = "gasf"
GADF = "gadf"
RP = "rp"


class InvalidSeries(ValueError):
    """Input series violates the time-series contract (non-finite or too short)."""


class InvalidDownsample(ValueError):
    """PAA target length is zero or exceeds the series length."""


class InvalidSignalSpec(ValueError):
    """Sinusoid parameters are unusable (Nyquist violation, bad duration...)."""


@dataclass(frozen=True)
class RpConfig:
    """Threshold policy for the recurrence plot.

    Exactly one of `percentile` / `epsilon` is active. The percentile
    policy resolves epsilon to the p-th percentile (linear interpolation)
    of the off-diagonal pairwise distances, which keeps recurrence density
    comparable across samples; a fixed epsilon is an absolute distance.
    """

    percentile: float | None = 10.0
    epsilon: float | None = None

    def __post_init__(self):
        if (self.percentile is None) == (self.epsilon is None):
            raise ValueError("exactly one of percentile/epsilon must be set")
        if self.percentile is not None and not 0.0 < self.percentile < 100.0:
            raise ValueError(f"percentile must be in (0, 100), got {self.percentile}")
        if self.epsilon is not None and not self.epsilon > 0.0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")


@dataclass(frozen=True)
class EncodingMatrix:
    """A square encoding matrix tagged with its kind ('gasf', 'gadf' or 'rp').

    GASF values lie in [-1, 1] and the matrix is symmetric; GADF values lie
    in [-1, 1] with an antisymmetric matrix and zero diagonal; RP values
    are {0, 1} with a symmetric matrix and all-ones diagonal.
    """

    values: np.ndarray
    kind: str

    def __post_init__(self):
        self.values.setflags(write=False)

    @property
    def n(self) -> int:
        return self.values.shape[0]


def _as_series(values, min_len: int = 1) -> np.ndarray:
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1 or x.size < min_len:
        raise InvalidSeries(f"expected 1D series of length >= {min_len}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidSeries("series contains NaN or Inf")
    return x


def rescale_minmax(series) -> np.ndarray:
    """Affinely map a series onto [-1, 1].

    x -> 2*(x - min)/(max - min) - 1. A constant series maps to all zeros
    (the midpoint) rather than raising: near-constant background regions
    should encode neutrally, not fail the whole sample.
    """
    x = _as_series(series, min_len=2)
    lo, hi = x.min(), x.max()
    if hi == lo:
        return np.zeros_like(x)
    return 2.0 * (x - lo) / (hi - lo) - 1.0


def to_polar(series) -> np.ndarray:
    """Polar-encode a [-1, 1] series as angles arccos(x) in [0, pi].

    Inputs are clamped to [-1, 1] first to absorb floating-point drift from
    rescaling; values outside that by more than rounding noise indicate a
    caller bug but are clamped all the same.
    """
    x = _as_series(series)
    return np.arccos(np.clip(x, -1.0, 1.0))


def gasf(angles) -> EncodingMatrix:
    """Gramian angular summation field: M[i, j] = cos(angles[i] + angles[j]).

    Exactly symmetric: the outer sum is formed once, so M[i, j] and M[j, i]
    are the cosine of bitwise-identical floats.
    """
    a = _as_series(angles)
    m = np.cos(np.add.outer(a, a))
    np.clip(m, -1.0, 1.0, out=m)
    return EncodingMatrix(m, GASF)


def gadf(angles) -> EncodingMatrix:
    """Gramian angular difference field: M[i, j] = sin(angles[i] - angles[j]).

    The lower triangle is mirrored from the upper with negated sign and the
    diagonal forced to zero, so antisymmetry holds exactly on any libm.
    """
    a = _as_series(angles)
    m = np.sin(np.subtract.outer(a, a))
    np.clip(m, -1.0, 1.0, out=m)
    upper = np.triu(m, k=1)
    m = upper - upper.T
    return EncodingMatrix(m, GADF)


def gram_matrix(columns) -> np.ndarray:
    """Gram matrix G = X^T X of a column-stacked data matrix.

    G[i, j] is the inner product of columns i and j; symmetric positive
    semidefinite. Accepts a 1D array as a single column.
    """
    x = np.asarray(columns, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise InvalidSeries(f"expected a 2D column stack, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidSeries("matrix contains NaN or Inf")
    return x.T @ x


def recurrence_plot(series, config: RpConfig | None = None) -> EncodingMatrix:
    """Binary recurrence plot of a scalar series.

    d(i, j) = |x[i] - x[j]|; R[i, j] = 1 iff d(i, j) < epsilon (strict).
    Under the percentile policy epsilon is the p-th percentile of the
    multiset {d(i, j) : i < j}. A percentile epsilon of 0 on a
    non-constant series falls back to the smallest positive pairwise
    distance, so the strict `<` rule still marks exact-duplicate pairs.
    The diagonal is always 1 (d(i, i) = 0 < epsilon); a constant series
    yields the all-ones matrix.
    """
    x = _as_series(series)
    cfg = config if config is not None else RpConfig()
    d = np.abs(np.subtract.outer(x, x))
    if cfg.epsilon is not None:
        eps = cfg.epsilon
    else:
        iu, ju = np.triu_indices(x.size, k=1)
        pairwise = d[iu, ju]
        if pairwise.size == 0 or not pairwise.any():
            # single point or constant series: every pair recurs
            return EncodingMatrix(np.ones((x.size, x.size), dtype=np.uint8), RP)
        eps = float(np.percentile(pairwise, cfg.percentile))
        if eps == 0.0:
            eps = float(pairwise[pairwise > 0].min())
    m = (d < eps).astype(np.uint8)
    np.fill_diagonal(m, 1)
    return EncodingMatrix(m, RP)


def paa(series, m: int) -> np.ndarray:
    """Piecewise aggregate approximation: downsample to m segment means.

    Segment k averages the half-open window [floor(k*n/m), floor((k+1)*n/m));
    the windows partition the input, so paa(x, n) == x and the global mean
    is preserved whenever m divides n.
    """
    x = _as_series(series)
    n = x.size
    if not 1 <= m <= n:
        raise InvalidDownsample(f"PAA length must satisfy 1 <= m <= {n}, got {m}")
    if m == n:
        return x.copy()
    bounds = (np.arange(m + 1, dtype=np.int64) * n) // m
    sums = np.add.reduceat(x, bounds[:-1])
    return sums / np.diff(bounds)


def generate_sinusoid(
    amplitude: float,
    frequency: float,
    duration: float,
    sample_rate: float,
    noise_sigma: float = 0.0,
    seed: int = 0,
) -> np.ndarray:
    """Seeded test signal: A*sin(2*pi*f*t/fs) + N(0, sigma) per sample.

    Parameters
    ----------
    amplitude : peak amplitude A (A = 0 gives pure noise).
    frequency : sinusoid frequency in Hz; must satisfy fs > 2*f.
    duration : signal length in seconds; sample count is round(duration*fs).
    sample_rate : fs in Hz.
    noise_sigma : standard deviation of additive Gaussian noise (>= 0).
    seed : seeds the noise generator; identical seeds reproduce the series
        bit for bit.
    """
    if duration <= 0:
        raise InvalidSignalSpec(f"duration must be > 0, got {duration}")
    if sample_rate <= 2.0 * frequency:
        raise InvalidSignalSpec(
            f"sample_rate {sample_rate} must exceed twice the frequency {frequency}"
        )
    if noise_sigma < 0:
        raise InvalidSignalSpec(f"noise_sigma must be >= 0, got {noise_sigma}")
    n = int(round(duration * sample_rate))
    if n < 1:
        raise InvalidSignalSpec("duration too short for one sample")
    t = np.arange(n, dtype=np.float64)
    values = amplitude * np.sin(2.0 * math.pi * frequency * t / sample_rate)
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        values = values + rng.normal(0.0, noise_sigma, size=n)
    return values
