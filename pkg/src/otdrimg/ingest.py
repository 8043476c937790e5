"""Measurement-file ingestion: MAT level-5 parsing and a CSV fallback.

Each measurement sample is a 12 x 10,000 intensity matrix (12 equidistant
fiber regions, 10,000 pulses) with one of six event labels. Samples arrive
either as MAT level-5 binary files (one or more real numeric 2-D matrices
per file) or as a plain-text CSV fallback (12 columns x 10,000 rows per
sample, samples separated by a blank line).

The MAT reader is a self-contained subset parser: little- and big-endian
files, numeric storage types, DEFLATE-compressed (miCOMPRESSED) elements,
and the double/single/int16/uint16 array classes. Cell arrays, structs,
sparse/complex data and the v7.3 HDF5 container are out of scope; v7.3 is
rejected with a pointed message. Byte-level layout is documented in
docs/formats.md.
"""

from __future__ import annotations

import logging
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

REGION_COUNT = 12
REGION_LENGTH = 10_000

# event name -> class label (bijective over the six classes)
LABELS = {
    "Background": 0,
    "Digging": 1,
    "Knocking": 2,
    "Watering": 3,
    "Shaking": 4,
    "Walking": 5,
}
EVENT_NAMES = [name for name, _ in sorted(LABELS.items(), key=lambda kv: kv[1])]

_HDF5_MAGIC = b"\x89HDF\r\n\x1a\n"

# MAT data type tags
_MI_INT8, _MI_UINT8, _MI_INT16, _MI_UINT16 = 1, 2, 3, 4
_MI_INT32, _MI_UINT32, _MI_SINGLE, _MI_DOUBLE = 5, 6, 7, 9
_MI_INT64, _MI_UINT64, _MI_MATRIX, _MI_COMPRESSED = 12, 13, 14, 15

_MI_DTYPES = {
    _MI_INT8: "i1",
    _MI_UINT8: "u1",
    _MI_INT16: "i2",
    _MI_UINT16: "u2",
    _MI_INT32: "i4",
    _MI_UINT32: "u4",
    _MI_SINGLE: "f4",
    _MI_DOUBLE: "f8",
    _MI_INT64: "i8",
    _MI_UINT64: "u8",
}

# mx array classes this reader converts; everything else is skipped
_MX_CLASSES = {
    6: "double",
    7: "single",
    10: "int16",
    11: "uint16",
}
_MX_NAMES = {
    1: "cell",
    2: "struct",
    3: "object",
    4: "char",
    5: "sparse",
    6: "double",
    7: "single",
    8: "int8",
    9: "uint8",
    10: "int16",
    11: "uint16",
    12: "int32",
    13: "uint32",
    14: "int64",
    15: "uint64",
}

_COMPLEX_FLAG = 0x0800


class MatFormatError(ValueError):
    """Base for every typed MAT parsing failure."""


class UnsupportedMatFormat(MatFormatError):
    """Not a MAT level-5 file (bad 128-byte header or unknown version)."""


class UnsupportedMatV73(MatFormatError):
    """MAT v7.3 (HDF5 container) — not supported by this reader."""


class CorruptMatFile(MatFormatError):
    """Structurally broken MAT level-5 content (truncation, bad sizes...)."""


class ShapeMismatch(ValueError):
    """Matrix is not 12 x 10,000 (after the optional transpose)."""


class CsvShapeError(ValueError):
    """CSV fallback file has ragged or incomplete rows."""


@dataclass(frozen=True)
class RawSample:
    """One measurement: 12 region series x 10,000 points plus a class label."""

    sample_id: str
    regions: np.ndarray  # (12, 10000) float64
    label: int

    def __post_init__(self):
        if self.regions.shape != (REGION_COUNT, REGION_LENGTH):
            raise ShapeMismatch(
                f"{self.sample_id}: regions shape {self.regions.shape}, "
                f"expected ({REGION_COUNT}, {REGION_LENGTH})"
            )
        if self.label not in LABELS.values():
            raise ValueError(f"{self.sample_id}: label {self.label} outside 0..5")


@dataclass
class IngestConfig:
    """Where to read samples from and how to interpret the MAT variables.

    sources maps an event name (must be a LABELS key) to its measurement
    files. mat_variable optionally restricts parsing to one named variable,
    either per file basename or under the "*" key for every file. The
    transpose flag accepts 10,000 x 12 matrices by transposing them; it is
    explicit rather than auto-detected so a square file can never be
    silently misread.
    """

    sources: dict[str, list[Path]] = field(default_factory=dict)
    mat_variable: dict[str, str] = field(default_factory=dict)
    transpose: bool = False

    def __post_init__(self):
        for event in self.sources:
            if event not in LABELS:
                raise ValueError(f"unknown event name {event!r}; expected one of {EVENT_NAMES}")

    def variable_for(self, path: Path) -> str | None:
        return self.mat_variable.get(Path(path).name, self.mat_variable.get("*"))


@dataclass(frozen=True)
class MatVariable:
    """One decoded (or skipped) top-level MAT variable."""

    name: str
    mat_class: str
    shape: tuple[int, ...]
    data: np.ndarray | None  # float64, None when the class/shape is unsupported
    note: str = ""


class _Cursor:
    """Bounds-checked byte reader; every overrun is a CorruptMatFile."""

    def __init__(self, buf: bytes, endian: str):
        self.buf = buf
        self.pos = 0
        self.endian = endian

    def remaining(self) -> int:
        return len(self.buf) - self.pos

    def take(self, n: int) -> bytes:
        if n < 0 or self.pos + n > len(self.buf):
            raise CorruptMatFile(
                f"truncated element: wanted {n} bytes at offset {self.pos}, "
                f"have {self.remaining()}"
            )
        out = self.buf[self.pos : self.pos + n]
        self.pos += n
        return out

    def pad_to_8(self):
        self.pos += (-self.pos) % 8

    def read_tag(self) -> tuple[int, int, bytes | None]:
        """Return (mtype, nbytes, small_payload). Small data elements pack
        payloads <= 4 bytes into the tag itself."""
        raw = self.take(8)
        (word,) = struct.unpack(self.endian + "I", raw[:4])
        if word & 0xFFFF0000:
            nbytes = word >> 16
            mtype = word & 0xFFFF
            if nbytes > 4:
                raise CorruptMatFile(f"small element claims {nbytes} bytes")
            return mtype, nbytes, raw[4 : 4 + nbytes]
        (nbytes,) = struct.unpack(self.endian + "I", raw[4:])
        return word, nbytes, None

    def read_element(self) -> tuple[int, bytes]:
        """Read one sub-element (tag + payload), consuming trailing padding."""
        mtype, nbytes, small = self.read_tag()
        if small is not None:
            return mtype, small
        payload = self.take(nbytes)
        self.pad_to_8()
        return mtype, payload


def _numeric(payload: bytes, mtype: int, endian: str) -> np.ndarray:
    code = _MI_DTYPES.get(mtype)
    if code is None:
        raise CorruptMatFile(f"unexpected numeric storage type {mtype}")
    dt = np.dtype(endian + code)
    if len(payload) % dt.itemsize:
        raise CorruptMatFile(
            f"numeric payload of {len(payload)} bytes not divisible by "
            f"itemsize {dt.itemsize}"
        )
    return np.frombuffer(payload, dtype=dt)


def _parse_matrix(payload: bytes, endian: str) -> MatVariable:
    cur = _Cursor(payload, endian)
    mtype, flags_raw = cur.read_element()
    if mtype != _MI_UINT32 or len(flags_raw) < 8:
        raise CorruptMatFile("miMATRIX does not start with an array-flags element")
    (flags,) = struct.unpack(endian + "I", flags_raw[:4])
    mat_class = flags & 0xFF
    is_complex = bool(flags & _COMPLEX_FLAG)

    mtype, dims_raw = cur.read_element()
    dims = tuple(int(d) for d in _numeric(dims_raw, mtype, endian))

    mtype, name_raw = cur.read_element()
    name = name_raw.decode("ascii", errors="replace").rstrip("\x00")

    class_name = _MX_NAMES.get(mat_class, f"class{mat_class}")
    if mat_class not in _MX_CLASSES:
        return MatVariable(name, class_name, dims, None, "unsupported class")
    if is_complex:
        return MatVariable(name, class_name, dims, None, "complex data")

    mtype, real_raw = cur.read_element()
    values = _numeric(real_raw, mtype, endian).astype(np.float64)
    if int(np.prod(dims)) != values.size:
        raise CorruptMatFile(
            f"variable {name!r}: dims {dims} need {int(np.prod(dims))} values, "
            f"got {values.size}"
        )
    if len(dims) != 2:
        return MatVariable(name, class_name, dims, None, f"{len(dims)}-D array")
    # MAT stores column-major
    data = values.reshape(dims, order="F")
    return MatVariable(name, class_name, dims, data, "")


def scan_mat(path) -> list[MatVariable]:
    """Walk every top-level variable of a MAT level-5 file.

    Returns one MatVariable per miMATRIX element, decoded to float64 where
    the class is supported and 2-D, with a note explaining any skip.
    """
    raw = Path(path).read_bytes()
    if raw.startswith(_HDF5_MAGIC):
        raise UnsupportedMatV73(
            f"{path}: MAT v7.3 (HDF5) file; re-save with '-v7' or convert first"
        )
    if len(raw) < 128:
        raise UnsupportedMatFormat(f"{path}: shorter than the 128-byte MAT header")
    endian_tag = raw[126:128]
    if endian_tag == b"IM":
        endian = "<"
    elif endian_tag == b"MI":
        endian = ">"
    else:
        raise UnsupportedMatFormat(f"{path}: bad endian indicator {endian_tag!r}")
    (version,) = struct.unpack(endian + "H", raw[124:126])
    if version == 0x0200:
        raise UnsupportedMatV73(
            f"{path}: MAT v7.3 header; re-save with '-v7' or convert first"
        )
    if version != 0x0100:
        raise UnsupportedMatFormat(f"{path}: unknown MAT version 0x{version:04x}")

    cur = _Cursor(raw, endian)
    cur.pos = 128
    out: list[MatVariable] = []
    while cur.remaining() >= 8:
        mtype, nbytes, small = cur.read_tag()
        if small is not None:
            logger.warning("%s: skipping small top-level element type %d", path, mtype)
            continue
        if mtype == _MI_COMPRESSED:
            blob = cur.take(nbytes)  # compressed elements are not padded
            try:
                inner = zlib.decompress(blob)
            except zlib.error as exc:
                raise CorruptMatFile(f"{path}: bad DEFLATE stream: {exc}") from exc
            icur = _Cursor(inner, endian)
            imtype, ibytes, _ = icur.read_tag()
            if imtype != _MI_MATRIX:
                logger.warning(
                    "%s: compressed element holds type %d, not miMATRIX; skipped",
                    path,
                    imtype,
                )
                continue
            out.append(_parse_matrix(icur.take(ibytes), endian))
        elif mtype == _MI_MATRIX:
            payload = cur.take(nbytes)
            cur.pad_to_8()
            out.append(_parse_matrix(payload, endian))
        else:
            logger.warning("%s: skipping top-level element type %d", path, mtype)
            cur.take(nbytes)
            cur.pad_to_8()
    return out


def parse_mat(path, config: IngestConfig | None = None) -> list[np.ndarray]:
    """Decode the real numeric 2-D matrices of a MAT level-5 file.

    With a configured variable name only that variable is returned;
    otherwise every supported matrix, in file order. Unsupported variables
    are skipped with a logged warning.
    """
    cfg = config if config is not None else IngestConfig()
    wanted = cfg.variable_for(Path(path))
    matrices = []
    for var in scan_mat(path):
        if wanted is not None and var.name != wanted:
            continue
        if var.data is None:
            logger.warning("%s: skipping variable %r (%s)", path, var.name, var.note)
            continue
        matrices.append(var.data)
    if wanted is not None and not matrices:
        raise ValueError(f"{path}: configured variable {wanted!r} not found")
    return matrices


def to_samples(
    matrices: list[np.ndarray],
    event: str,
    config: IngestConfig | None = None,
    source: str = "mem",
) -> list[RawSample]:
    """Turn decoded matrices into labelled RawSamples.

    Each matrix must be 12 x 10,000 (or 10,000 x 12 with the transpose
    flag). sample_id = "<event>_<source>_<index>".
    """
    cfg = config if config is not None else IngestConfig()
    if event not in LABELS:
        raise ValueError(f"unknown event name {event!r}; expected one of {EVENT_NAMES}")
    label = LABELS[event]
    samples = []
    for i, m in enumerate(matrices):
        m = np.asarray(m, dtype=np.float64)
        if cfg.transpose and m.shape == (REGION_LENGTH, REGION_COUNT):
            m = m.T
        if m.shape != (REGION_COUNT, REGION_LENGTH):
            raise ShapeMismatch(
                f"{event}/{source}[{i}]: got shape {m.shape}, expected "
                f"({REGION_COUNT}, {REGION_LENGTH})"
                + (" or its transpose" if cfg.transpose else "")
            )
        samples.append(RawSample(f"{event}_{source}_{i}", np.ascontiguousarray(m), label))
    return samples


def parse_csv_fallback(path, event: str, config: IngestConfig | None = None) -> list[RawSample]:
    """Parse the plain-text fallback format.

    12 comma-separated columns (one per region) x 10,000 rows per sample;
    samples separated by one blank line. Ragged or missing rows raise
    CsvShapeError with the offending line number.
    """
    rows: list[list[float]] = []
    blocks: list[np.ndarray] = []
    start_line = 1

    def close_block(line_no: int):
        if not rows:
            return
        if len(rows) != REGION_LENGTH:
            raise CsvShapeError(
                f"{path}:{line_no}: sample starting at line {start_line} has "
                f"{len(rows)} rows, expected {REGION_LENGTH}"
            )
        blocks.append(np.asarray(rows, dtype=np.float64).T)  # (12, 10000)
        rows.clear()

    with open(path, "r", encoding="utf-8") as fh:
        line_no = 0
        for line_no, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                close_block(line_no)
                start_line = line_no + 1
                continue
            fields = text.split(",")
            if len(fields) != REGION_COUNT:
                raise CsvShapeError(
                    f"{path}:{line_no}: expected {REGION_COUNT} fields, got {len(fields)}"
                )
            try:
                rows.append([float(f) for f in fields])
            except ValueError as exc:
                raise CsvShapeError(f"{path}:{line_no}: {exc}") from exc
        close_block(line_no + 1)

    source = Path(path).stem
    return to_samples(blocks, event, config, source=source)


def write_csv_fallback(samples: list[RawSample], path) -> None:
    """Write samples in the CSV fallback format (lossless float round-trip)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for k, sample in enumerate(samples):
            if k:
                fh.write("\n")
            cols = sample.regions  # (12, 10000)
            for t in range(REGION_LENGTH):
                fh.write(",".join(repr(float(v)) for v in cols[:, t]))
                fh.write("\n")
