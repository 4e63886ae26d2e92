"""On-disk formats: embedding/logit matrices, label vectors, temperature records.

Matrix files (conventional extension ``.calibmx``) are a fixed-stride binary
layout, written and read byte-exactly:

    bytes 0-7    magic, ASCII ``CALIBMX1``
    bytes 8-11   dtype code, little-endian u32 (1 = float32)
    bytes 12-19  rows, little-endian u64
    bytes 20-27  cols, little-endian u64
    bytes 28-    payload: rows*cols little-endian IEEE-754 float32, row-major

Optional metadata lives in a JSON sidecar at ``<path>.meta.json`` so the
binary payload stays mmap-friendly. Labels are JSON documents
``{"num_classes": C, "labels": [...]}``; temperature records are JSON with
snake_case keys. All JSON emitted here is deterministic, so a read/write
cycle reproduces files byte-for-byte.
"""

from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from calibkit.errors import (
    FormatError,
    IoError,
    NonFiniteError,
    RangeError,
    TruncationError,
    ValidationError,
)

MAGIC = b"CALIBMX1"
DTYPE_FLOAT32 = 1
_HEADER = struct.Struct("<8sIQQ")
SIDECAR_SUFFIX = ".meta.json"


@dataclass(eq=False)
class MatrixFile:
    """A 2-D float32 matrix plus its optional sidecar metadata."""

    values: np.ndarray
    meta: dict | None = None

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float32)
        if self.values.ndim != 2:
            raise FormatError(f"matrix must be 2-D, got shape {self.values.shape}")

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]


@dataclass(eq=False)
class LabelVector:
    """Ground-truth class indices in [0, num_classes)."""

    labels: np.ndarray
    num_classes: int

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.labels.ndim != 1 or self.labels.size < 1:
            raise RangeError("labels must be a non-empty 1-D sequence")
        if self.num_classes < 2:
            raise RangeError(f"num_classes must be >= 2, got {self.num_classes}")
        bad = (self.labels < 0) | (self.labels >= self.num_classes)
        if bad.any():
            i = int(np.argmax(bad))
            raise RangeError(
                f"label {int(self.labels[i])} at index {i} outside [0, {self.num_classes})"
            )

    def __len__(self) -> int:
        return int(self.labels.size)


@dataclass
class TemperatureRecord:
    """A fitted temperature tagged with model provenance.

    One record per (architecture, pre-training dataset) pair; once fitted it
    is reused on any downstream dataset or prompt with no further fitting.
    """

    temperature: float
    architecture: str
    pretrain_dataset: str
    auxiliary_dataset: str = ""
    prompt_template: str = ""
    fit_nll: float = 0.0
    created_at: str = ""

    def __post_init__(self):
        if not np.isfinite(self.temperature) or self.temperature <= 0:
            raise RangeError(f"temperature must be finite and > 0, got {self.temperature}")
        if not self.architecture:
            raise ValidationError("architecture must be non-empty")
        if not self.pretrain_dataset:
            raise ValidationError("pretrain_dataset must be non-empty")


def _validate_payload(values: np.ndarray) -> None:
    if values.shape[0] < 1 or values.shape[1] < 1:
        raise FormatError(f"matrix must have at least one row and column, got {values.shape}")
    if not np.isfinite(values).all():
        raise NonFiniteError("matrix contains NaN or Inf")


def write_matrix(matrix: MatrixFile, path: str | Path) -> None:
    """Write a matrix in the CALIBMX1 layout, plus its sidecar if meta is set."""
    _validate_payload(matrix.values)
    header = _HEADER.pack(MAGIC, DTYPE_FLOAT32, matrix.rows, matrix.cols)
    payload = matrix.values.astype("<f4", copy=False).tobytes(order="C")
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(payload)
    except OSError as exc:
        raise IoError(f"cannot write matrix to {path}: {exc}") from exc
    if matrix.meta is not None:
        _write_json(matrix.meta, sidecar_path(path), sort_keys=True)


def read_matrix(path: str | Path) -> MatrixFile:
    """Read a CALIBMX1 matrix, validating header, payload size, and finiteness."""
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read matrix from {path}: {exc}") from exc
    if len(blob) < _HEADER.size:
        raise TruncationError(f"{path}: file shorter than the {_HEADER.size}-byte header")
    magic, dtype_code, rows, cols = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if dtype_code != DTYPE_FLOAT32:
        raise FormatError(f"{path}: unknown dtype code {dtype_code}")
    if rows < 1 or cols < 1:
        raise FormatError(f"{path}: header declares degenerate shape {rows}x{cols}")
    expected = rows * cols * 4
    got = len(blob) - _HEADER.size
    if got != expected:
        raise TruncationError(f"{path}: payload is {got} bytes, header claims {expected}")
    values = np.frombuffer(blob, dtype="<f4", offset=_HEADER.size).reshape(rows, cols)
    if not np.isfinite(values).all():
        raise NonFiniteError(f"{path}: payload contains NaN or Inf")
    meta = None
    sidecar = sidecar_path(path)
    if sidecar.exists():
        meta = _read_json(sidecar)
    return MatrixFile(values=values.copy(), meta=meta)


def sidecar_path(path: str | Path) -> Path:
    return Path(str(path) + SIDECAR_SUFFIX)


def write_labels(labels: LabelVector, path: str | Path) -> None:
    doc = {"num_classes": labels.num_classes, "labels": [int(v) for v in labels.labels]}
    _write_json(doc, path, compact=True)


def read_labels(path: str | Path) -> LabelVector:
    doc = _read_json(path)
    try:
        return LabelVector(labels=np.asarray(doc["labels"]), num_classes=int(doc["num_classes"]))
    except KeyError as exc:
        raise FormatError(f"{path}: missing key {exc} in labels document") from exc


def write_temperature_record(record: TemperatureRecord, path: str | Path) -> None:
    doc = {
        "temperature": record.temperature,
        "architecture": record.architecture,
        "pretrain_dataset": record.pretrain_dataset,
        "auxiliary_dataset": record.auxiliary_dataset,
        "prompt_template": record.prompt_template,
        "fit_nll": record.fit_nll,
        "created_at": record.created_at,
    }
    _write_json(doc, path)


def read_temperature_record(path: str | Path) -> TemperatureRecord:
    doc = _read_json(path)
    try:
        return TemperatureRecord(
            temperature=float(doc["temperature"]),
            architecture=str(doc["architecture"]),
            pretrain_dataset=str(doc["pretrain_dataset"]),
            auxiliary_dataset=str(doc.get("auxiliary_dataset", "")),
            prompt_template=str(doc.get("prompt_template", "")),
            fit_nll=float(doc.get("fit_nll", 0.0)),
            created_at=str(doc.get("created_at", "")),
        )
    except KeyError as exc:
        raise FormatError(f"{path}: missing key {exc} in temperature record") from exc


def default_created_at() -> str:
    """ISO-8601 UTC timestamp; honors SOURCE_DATE_EPOCH for reproducible outputs."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        return datetime.fromtimestamp(int(epoch), tz=timezone.utc).isoformat()
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _write_json(doc, path: str | Path, compact: bool = False, sort_keys: bool = False) -> None:
    if compact:
        text = json.dumps(doc, separators=(",", ":"), sort_keys=sort_keys)
    else:
        text = json.dumps(doc, indent=2, sort_keys=sort_keys)
    try:
        Path(path).write_text(text + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _read_json(path: str | Path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from exc
