"""Grayscale/RGB image assembly and deterministic PNG output.

Image conventions: a grayscale image is a (height, width) uint8 array; an
RGB image is a (height, width, 3) uint8 array with channel order R, G, B.
Encoding matrices quantize to grayscale tiles, tiles compose into a
row-major grid per technique, the three technique grids fuse into one RGB
image, and an area (box) filter downsamples to the model resolution.

The PNG writer is self-contained (stdlib zlib/struct) with fixed encoder
settings so identical pixel data always produces byte-identical files:
8-bit RGB, no alpha, per-row filter chosen by the minimum sum of absolute
signed bytes (ties break to the lowest filter type), zlib level 6, one
IDAT chunk. See docs/formats.md.
"""

from __future__ import annotations

import hashlib
import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .encodings import GADF, GASF, RP, EncodingMatrix

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
_ZLIB_LEVEL = 6


class EncodingRangeError(ValueError):
    """Encoding matrix entry outside its kind's legal range."""


class GridShapeError(ValueError):
    """Tile count or tile dimensions do not match the grid layout."""


class ChannelShapeError(ValueError):
    """RGB channel planes disagree in shape."""


class UnsupportedResize(ValueError):
    """Requested output is larger than the input (only downscaling is supported)."""


class PngWriteError(OSError):
    """PNG file could not be written; message carries the path."""


@dataclass(frozen=True)
class GridLayout:
    """Region-tile grid geometry: 12 regions as a 3x4 grid of 500x500 tiles."""

    rows: int = 3
    cols: int = 4
    tile_height: int = 500
    tile_width: int = 500


def matrix_to_gray(matrix: EncodingMatrix) -> np.ndarray:
    """Quantize an encoding matrix to an 8-bit grayscale image.

    GASF/GADF use the unique affine map of [-1, 1] onto [0, 255] hitting
    both endpoints, rounding half away from zero (so 0 -> 128); RP maps
    0 -> 0 and 1 -> 255.
    """
    v = matrix.values
    if matrix.kind in (GASF, GADF):
        if v.min() < -1.0 or v.max() > 1.0:
            raise EncodingRangeError(f"{matrix.kind} entries outside [-1, 1]")
        # values are non-negative after the shift, so floor(x + 0.5) rounds
        # half away from zero
        return np.floor((v + 1.0) * (255.0 / 2.0) + 0.5).astype(np.uint8)
    if matrix.kind == RP:
        binary = np.isin(v, (0, 1)).all()
        if not binary:
            raise EncodingRangeError("rp entries must be 0 or 1")
        return (np.asarray(v, dtype=np.uint8) * np.uint8(255))
    raise ValueError(f"unknown encoding kind {matrix.kind!r}")


def compose_grid(tiles: list[np.ndarray], layout: GridLayout | None = None) -> np.ndarray:
    """Assemble grayscale tiles into one image, row-major by tile index.

    Tile k lands at grid row k // cols, grid column k % cols. Every tile
    must be exactly tile_height x tile_width.
    """
    lay = layout if layout is not None else GridLayout()
    if len(tiles) != lay.rows * lay.cols:
        raise GridShapeError(f"expected {lay.rows * lay.cols} tiles, got {len(tiles)}")
    out = np.empty((lay.rows * lay.tile_height, lay.cols * lay.tile_width), dtype=np.uint8)
    for k, tile in enumerate(tiles):
        if tile.shape != (lay.tile_height, lay.tile_width):
            raise GridShapeError(
                f"tile {k} has shape {tile.shape}, expected "
                f"({lay.tile_height}, {lay.tile_width})"
            )
        r, c = divmod(k, lay.cols)
        out[
            r * lay.tile_height : (r + 1) * lay.tile_height,
            c * lay.tile_width : (c + 1) * lay.tile_width,
        ] = tile
    return out


def fuse_rgb(red: np.ndarray, green: np.ndarray, blue: np.ndarray) -> np.ndarray:
    """Stack three grayscale planes into an RGB image (channel order fixed R, G, B)."""
    if not (red.shape == green.shape == blue.shape):
        raise ChannelShapeError(
            f"channel shapes differ: {red.shape}, {green.shape}, {blue.shape}"
        )
    return np.stack(
        [np.asarray(p, dtype=np.uint8) for p in (red, green, blue)], axis=-1
    )


def _axis_spans(n_in: int, n_out: int):
    """Per output index: (first source index, coverage weights summing to 1).

    Overlaps are computed on the common integer grid scaled by n_out, so the
    weights are exact rationals evaluated once in float64 — no boundary
    drift for any n_in/n_out pair.
    """
    spans = []
    for k in range(n_out):
        lo, hi = k * n_in, (k + 1) * n_in  # output cell k in grid units
        i0 = lo // n_out
        i1 = -(-hi // n_out)  # ceil division
        idx = np.arange(i0, i1, dtype=np.int64)
        overlap = np.minimum((idx + 1) * n_out, hi) - np.maximum(idx * n_out, lo)
        spans.append((i0, overlap.astype(np.float64) / float(n_in)))
    return spans


def resize_area(image: np.ndarray, out_height: int, out_width: int) -> np.ndarray:
    """Downscale an RGB image with a coverage-weighted box (area) filter.

    Each output pixel is the mean of the source pixels its back-projected
    footprint overlaps, weighted by overlap area, per channel, rounded half
    away from zero. Aspect ratio is deliberately not preserved: 1500x2000
    squashes straight to 224x224.
    """
    img = np.asarray(image)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ChannelShapeError(f"expected (h, w, 3) image, got shape {img.shape}")
    h, w = img.shape[:2]
    if not (1 <= out_height <= h and 1 <= out_width <= w):
        raise UnsupportedResize(
            f"can only downscale: {h}x{w} -> {out_height}x{out_width}"
        )
    acc = img.astype(np.float64)
    rows = np.empty((out_height, w, 3), dtype=np.float64)
    for k, (i0, weights) in enumerate(_axis_spans(h, out_height)):
        rows[k] = np.tensordot(weights, acc[i0 : i0 + weights.size], axes=(0, 0))
    out = np.empty((out_height, out_width, 3), dtype=np.float64)
    for k, (i0, weights) in enumerate(_axis_spans(w, out_width)):
        out[:, k] = np.tensordot(weights, rows[:, i0 : i0 + weights.size], axes=(0, 1))
    return np.floor(out + 0.5).astype(np.uint8)


def _paeth(left: np.ndarray, up: np.ndarray, upleft: np.ndarray) -> np.ndarray:
    a = left.astype(np.int32)
    b = up.astype(np.int32)
    c = upleft.astype(np.int32)
    p = a + b - c
    pa, pb, pc = np.abs(p - a), np.abs(p - b), np.abs(p - c)
    pred = np.where((pa <= pb) & (pa <= pc), a, np.where(pb <= pc, b, c))
    return pred.astype(np.uint8)


def _filtered_scanlines(pixels: np.ndarray) -> bytes:
    """Serialize rows with the per-row minimum-cost filter (types 0-4)."""
    h = pixels.shape[0]
    raw = pixels.reshape(h, -1)  # (h, w*3)
    prior = np.zeros_like(raw)
    prior[1:] = raw[:-1]
    left = np.zeros_like(raw)
    left[:, 3:] = raw[:, :-3]
    upleft = np.zeros_like(raw)
    upleft[:, 3:] = prior[:, :-3]

    candidates = np.stack(
        [
            raw,
            raw - left,  # sub (uint8 wraps mod 256)
            raw - prior,  # up
            raw - ((left.astype(np.uint16) + prior.astype(np.uint16)) // 2).astype(np.uint8),
            raw - _paeth(left, prior, upleft),
        ]
    )
    as_signed = candidates.astype(np.int64)
    cost = np.minimum(as_signed, 256 - as_signed).sum(axis=2)  # (5, h)
    chosen = cost.argmin(axis=0)  # argmin takes the lowest type on ties

    out = bytearray()
    for y in range(h):
        f = int(chosen[y])
        out.append(f)
        out += candidates[f, y].tobytes()
    return bytes(out)


def _chunk(tag: bytes, payload: bytes) -> bytes:
    return (
        struct.pack(">I", len(payload))
        + tag
        + payload
        + struct.pack(">I", zlib.crc32(tag + payload))
    )


def png_bytes(image: np.ndarray) -> bytes:
    """Encode an RGB image as PNG bytes (deterministic, see module docstring)."""
    img = np.ascontiguousarray(image, dtype=np.uint8)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ChannelShapeError(f"expected (h, w, 3) image, got shape {img.shape}")
    h, w = img.shape[:2]
    ihdr = struct.pack(">IIBBBBB", w, h, 8, 2, 0, 0, 0)  # 8-bit, color type 2 = RGB
    idat = zlib.compress(_filtered_scanlines(img), _ZLIB_LEVEL)
    return (
        PNG_SIGNATURE
        + _chunk(b"IHDR", ihdr)
        + _chunk(b"IDAT", idat)
        + _chunk(b"IEND", b"")
    )


def content_hash(data: bytes) -> str:
    """64-bit content hash (blake2b-8) as 16 hex characters."""
    return hashlib.blake2b(data, digest_size=8).hexdigest()


def write_png(image: np.ndarray, path) -> str:
    """Write an RGB image as a PNG file and return its 64-bit content hash.

    Identical images yield byte-identical files and therefore identical
    hashes; concurrent calls are safe when they target distinct paths.
    """
    data = png_bytes(image)
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise PngWriteError(f"{path}: {exc}") from exc
    return content_hash(data)
