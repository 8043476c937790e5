"""Dataset-manifest reading and image loading.

Parses the manifest format documented in the dataset toolkit's
docs/formats.md: `# key=value` header lines, a
`sample_id,label,event,path,checksum,split` column header, one row per
sample with image paths relative to the manifest's directory.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

COLUMNS = "sample_id,label,event,path,checksum,split"


class DataError(ValueError):
    """Manifest or image data is unusable (missing files, bad rows...)."""


@dataclass(frozen=True)
class ManifestEntry:
    sample_id: str
    label: int
    event: str
    path: Path  # resolved absolute image path
    split: str


@dataclass(frozen=True)
class Manifest:
    entries: tuple[ManifestEntry, ...]
    header: dict[str, str]

    def subset(self, split: str) -> list[ManifestEntry]:
        return [e for e in self.entries if e.split == split]

    def splits(self) -> set[str]:
        return {e.split for e in self.entries}

    def fold_names(self) -> list[str]:
        return sorted(s for s in self.splits() if s.startswith("fold"))


def read_manifest(path) -> Manifest:
    path = Path(path)
    root = path.parent
    header: dict[str, str] = {}
    entries: list[ManifestEntry] = []
    saw_columns = False
    for ln, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].strip().partition("=")
            if sep:
                header[key.strip()] = value.strip()
            continue
        if not saw_columns:
            if line.strip() != COLUMNS:
                raise DataError(f"{path}:{ln}: expected column header '{COLUMNS}'")
            saw_columns = True
            continue
        parts = line.split(",")
        if len(parts) != 6:
            raise DataError(f"{path}:{ln}: expected 6 fields, got {len(parts)}")
        sample_id, label, event, rel, _checksum, split = parts
        entries.append(
            ManifestEntry(sample_id, int(label), event, root / rel, split)
        )
    if not entries:
        raise DataError(f"{path}: no sample rows")
    return Manifest(tuple(entries), header)


def load_images(entries: list[ManifestEntry]) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Load a subset as (images uint8 NHWC, labels int64, sample_ids)."""
    if not entries:
        raise DataError("empty subset: nothing to load")
    images, labels, ids = [], [], []
    for entry in entries:
        if not entry.path.is_file():
            raise DataError(f"{entry.sample_id}: image missing at {entry.path}")
        with Image.open(entry.path) as img:
            images.append(np.asarray(img.convert("RGB"), dtype=np.uint8))
        labels.append(entry.label)
        ids.append(entry.sample_id)
    return np.stack(images), np.asarray(labels, dtype=np.int64), ids
