"""Byte-level checks of the interchange writers, plus the interop proof:
the calibration toolkit's CLI must accept files this package writes."""

from __future__ import annotations

import json
import struct
import subprocess
import sys

import numpy as np
import pytest

from calibkit_exporter import formats
from calibkit_exporter.errors import ExportError, ValidationError


def test_matrix_header_and_payload_bytes(tmp_path):
    path = tmp_path / "eye.calibmx"
    formats.write_matrix(np.eye(2, dtype=np.float32), path)
    raw = path.read_bytes()
    assert raw[:8] == b"CALIBMX1"
    assert struct.unpack("<IQQ", raw[8:28]) == (1, 2, 2)
    assert raw[28:] == bytes.fromhex(
        "0000803f" "00000000" "00000000" "0000803f"
    )


def test_matrix_roundtrip_is_exact(tmp_path):
    rng = np.random.Generator(np.random.Philox(key=7))
    values = rng.standard_normal((13, 5)).astype(np.float32)
    path = tmp_path / "m.calibmx"
    formats.write_matrix(values, path)
    assert np.array_equal(formats.read_matrix(path), values)


@pytest.mark.parametrize("shape", [(4,), (0, 3), (3, 0)])
def test_matrix_rejects_bad_shapes(tmp_path, shape):
    with pytest.raises(ValidationError):
        formats.write_matrix(np.zeros(shape, dtype=np.float32), tmp_path / "m.calibmx")


def test_matrix_rejects_nonfinite(tmp_path):
    bad = np.array([[1.0, np.nan]], dtype=np.float32)
    with pytest.raises(ValidationError):
        formats.write_matrix(bad, tmp_path / "m.calibmx")


def test_read_matrix_rejects_bad_magic(tmp_path):
    path = tmp_path / "m.calibmx"
    formats.write_matrix(np.eye(2, dtype=np.float32), path)
    raw = bytearray(path.read_bytes())
    raw[0] ^= 0xFF
    path.write_bytes(bytes(raw))
    with pytest.raises(ExportError, match="CALIBMX1"):
        formats.read_matrix(path)


def test_read_matrix_rejects_truncated_payload(tmp_path):
    path = tmp_path / "m.calibmx"
    formats.write_matrix(np.eye(2, dtype=np.float32), path)
    path.write_bytes(path.read_bytes()[:-4])
    with pytest.raises(ExportError, match="payload"):
        formats.read_matrix(path)


def test_labels_document_shape(tmp_path):
    path = tmp_path / "labels.json"
    formats.write_labels(np.array([0, 2, 1]), 3, path)
    assert json.loads(path.read_text()) == {"num_classes": 3, "labels": [0, 2, 1]}


@pytest.mark.parametrize("labels", [[3], [-1], []])
def test_labels_validation(tmp_path, labels):
    with pytest.raises(ValidationError):
        formats.write_labels(np.asarray(labels, dtype=np.int64), 3, tmp_path / "l.json")


def test_toolkit_cli_accepts_exported_embeddings(tmp_path):
    """Round trip through the toolkit: exported image/class matrices fed to
    its `logits` subcommand must load, validate, and produce cosine logits."""
    rng = np.random.Generator(np.random.Philox(key=11))
    images = rng.standard_normal((4, 8)).astype(np.float32)
    classes = rng.standard_normal((3, 8)).astype(np.float32)
    images /= np.linalg.norm(images, axis=1, keepdims=True)
    classes /= np.linalg.norm(classes, axis=1, keepdims=True)
    formats.write_matrix(images, tmp_path / "images.calibmx")
    formats.write_matrix(classes, tmp_path / "classes.calibmx")

    proc = subprocess.run(
        [
            sys.executable, "-m", "calibkit", "logits",
            "--images", str(tmp_path / "images.calibmx"),
            "--classes", str(tmp_path / "classes.calibmx"),
            "--out", str(tmp_path / "logits.calibmx"),
        ],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr

    logits = formats.read_matrix(tmp_path / "logits.calibmx")
    assert logits.shape == (4, 3)
    assert logits.min() >= -100.0 and logits.max() <= 100.0
    expected = 100.0 * images.astype(np.float64) @ classes.astype(np.float64).T
    assert np.allclose(logits, expected, atol=1e-3)
