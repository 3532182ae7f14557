"""Flat-file I/O: a small binary matrix container plus CSV helpers."""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .errors import SpecmixError
from .graph import FeatureMatrix

MAGIC = b"MATBIN01"
_HEADER = struct.Struct("<QQ")


class MatrixFormatError(SpecmixError):
    """Binary matrix file is corrupt or not in the expected format."""


def write_matrix(path, array) -> None:
    """magic + u64 rows + u64 cols + row-major little-endian float64."""
    a = np.ascontiguousarray(np.asarray(array, dtype="<f8"))
    if a.ndim != 2:
        raise MatrixFormatError(f"only 2-d matrices are stored, got shape {a.shape}")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_HEADER.pack(a.shape[0], a.shape[1]))
        fh.write(a.tobytes(order="C"))


def read_matrix(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise MatrixFormatError(f"{path}: bad magic {magic!r}")
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise MatrixFormatError(f"{path}: truncated header")
        rows, cols = _HEADER.unpack(header)
        payload = fh.read()
    expected = rows * cols * 8
    if len(payload) != expected:
        raise MatrixFormatError(
            f"{path}: expected {expected} payload bytes, found {len(payload)}"
        )
    return np.frombuffer(payload, dtype="<f8").reshape(rows, cols).astype(float)


def _has_header(first_row: list[str]) -> bool:
    for cell in first_row:
        try:
            float(cell)
        except ValueError:
            return True
    return False


def read_feature_csv(path) -> FeatureMatrix:
    """Numeric CSV, one sample per row. A single leading header row is
    detected and skipped."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        rows = [r for r in reader if r]
    if not rows:
        raise MatrixFormatError(f"{path}: empty CSV")
    if _has_header(rows[0]):
        rows = rows[1:]
    if not rows:
        raise MatrixFormatError(f"{path}: header but no data rows")
    try:
        data = np.array([[float(c) for c in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise MatrixFormatError(f"{path}: non-numeric cell ({exc})") from exc
    return FeatureMatrix(data)


def write_labels_csv(path, labels) -> None:
    arr = np.asarray(labels, dtype=int)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label"])
        for v in arr:
            writer.writerow([int(v)])


def read_labels_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        rows = [r for r in reader if r]
    if not rows:
        raise MatrixFormatError(f"{path}: empty labels file")
    if _has_header(rows[0]):
        rows = rows[1:]
    try:
        return np.array([int(float(r[0])) for r in rows], dtype=int)
    except (ValueError, IndexError) as exc:
        raise MatrixFormatError(f"{path}: bad label row ({exc})") from exc


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
