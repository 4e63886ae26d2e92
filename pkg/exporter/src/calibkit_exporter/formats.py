"""Writers for the toolkit's on-disk interchange formats.

This package talks to the calibration toolkit only through files, so the
binary matrix layout is implemented here against its documented contract:
8-byte magic "CALIBMX1", little-endian u32 dtype code (1 = float32),
u64 rows, u64 cols, then row-major little-endian float32 payload. Labels are
JSON {"num_classes": C, "labels": [...]}.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from calibkit_exporter.errors import ExportError, ValidationError

MAGIC = b"CALIBMX1"
DTYPE_FLOAT32 = 1
_HEADER = struct.Struct("<8sIQQ")


def write_matrix(values: np.ndarray, path: str | Path) -> None:
    values = np.asarray(values, dtype=np.float32)
    if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
        raise ValidationError(f"matrix must be 2-D and non-empty, got shape {values.shape}")
    if not np.isfinite(values).all():
        raise ValidationError("matrix contains NaN or Inf")
    header = _HEADER.pack(MAGIC, DTYPE_FLOAT32, values.shape[0], values.shape[1])
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(values.astype("<f4", copy=False).tobytes(order="C"))
    except OSError as exc:
        raise ExportError(f"cannot write matrix to {path}: {exc}") from exc


def read_matrix(path: str | Path) -> np.ndarray:
    """Read-back used by tests and re-export comparisons."""
    blob = Path(path).read_bytes()
    magic, dtype_code, rows, cols = _HEADER.unpack_from(blob)
    if magic != MAGIC or dtype_code != DTYPE_FLOAT32:
        raise ExportError(f"{path}: not a CALIBMX1 float32 file")
    if len(blob) - _HEADER.size != rows * cols * 4:
        raise ExportError(f"{path}: payload size does not match header")
    return np.frombuffer(blob, dtype="<f4", offset=_HEADER.size).reshape(rows, cols).copy()


def write_labels(labels: np.ndarray, num_classes: int, path: str | Path) -> None:
    labels = np.asarray(labels)
    if labels.ndim != 1 or labels.size < 1:
        raise ValidationError(f"labels must be a non-empty vector, got shape {labels.shape}")
    if labels.min() < 0 or labels.max() >= num_classes:
        raise ValidationError("labels out of range for num_classes")
    doc = {"num_classes": int(num_classes), "labels": [int(v) for v in labels]}
    _write_json(doc, path, compact=True)


def write_meta(doc: dict, path: str | Path) -> None:
    _write_json(doc, path)


def _write_json(doc, path: str | Path, compact: bool = False) -> None:
    if compact:
        text = json.dumps(doc, separators=(",", ":"))
    else:
        text = json.dumps(doc, indent=2)
    try:
        Path(path).write_text(text + "\n", encoding="utf-8")
    except OSError as exc:
        raise ExportError(f"cannot write {path}: {exc}") from exc
