"""Zero-shot classification head: cosine logits, softmax, argmax prediction.

Logits follow the CLIP convention of 100 times the cosine similarity between
image and class-text embeddings. All reductions run in float64 regardless of
the float32 storage format.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from calibkit.errors import DegenerateEmbeddingError, NonFiniteError, RangeError, ShapeError
from calibkit.tensorio import LabelVector

COSINE_SCALE = 100.0

PROVENANCE_COSINE = "cosine_head"
PROVENANCE_EXTERNAL = "external"


@dataclass(eq=False)
class LogitMatrix:
    """N x C per-class scores; provenance records whether the cosine head made them."""

    values: np.ndarray
    provenance: str = PROVENANCE_EXTERNAL

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ShapeError(f"logits must be 2-D, got shape {self.values.shape}")
        if not np.isfinite(self.values).all():
            raise NonFiniteError("logits contain NaN or Inf")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def num_classes(self) -> int:
        return self.values.shape[1]


@dataclass(eq=False)
class ProbabilityMatrix:
    """N x C class probabilities; each row sums to 1."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ShapeError(f"probabilities must be 2-D, got shape {self.values.shape}")
        if not np.isfinite(self.values).all():
            raise NonFiniteError("probabilities contain non-finite entries")
        if (self.values < 0).any():
            raise RangeError("probabilities contain negative entries")
        if not np.allclose(self.values.sum(axis=1), 1.0, rtol=0.0, atol=1e-9):
            raise RangeError("probability rows do not sum to 1 within 1e-9")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def num_classes(self) -> int:
        return self.values.shape[1]


@dataclass(eq=False)
class PredictionSet:
    """Per-sample argmax prediction, confidence (max probability), correctness."""

    predicted: np.ndarray
    confidence: np.ndarray
    correct: np.ndarray

    def __post_init__(self):
        self.predicted = np.asarray(self.predicted, dtype=np.int64)
        self.confidence = np.asarray(self.confidence, dtype=np.float64)
        self.correct = np.asarray(self.correct, dtype=bool)
        n = self.predicted.size
        if self.confidence.size != n or self.correct.size != n:
            raise ShapeError("predicted, confidence, and correct must have equal length")
        if ((self.confidence < 0) | (self.confidence > 1)).any() or not np.isfinite(
            self.confidence
        ).all():
            raise RangeError("confidences must lie in [0, 1]")

    def __len__(self) -> int:
        return int(self.predicted.size)


def cosine_logits(image_embs: np.ndarray, class_embs: np.ndarray) -> LogitMatrix:
    """Compute 100 * cosine(image row, class row) for every pair.

    Cosine values are clipped to [-1, 1] before scaling so float rounding can
    never push a logit outside [-100, 100]. Output is invariant to positive
    rescaling of any embedding row.
    """
    a = np.asarray(image_embs, dtype=np.float64)
    b = np.asarray(class_embs, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError("embedding matrices must be 2-D")
    if a.shape[1] != b.shape[1]:
        raise ShapeError(
            f"embedding width mismatch: images have D={a.shape[1]}, classes D={b.shape[1]}"
        )
    norm_a = np.linalg.norm(a, axis=1)
    norm_b = np.linalg.norm(b, axis=1)
    if (norm_a == 0).any():
        raise DegenerateEmbeddingError(f"image embedding row {int(np.argmax(norm_a == 0))} has zero norm")
    if (norm_b == 0).any():
        raise DegenerateEmbeddingError(f"class embedding row {int(np.argmax(norm_b == 0))} has zero norm")
    cos = (a @ b.T) / np.outer(norm_a, norm_b)
    np.clip(cos, -1.0, 1.0, out=cos)
    return LogitMatrix(values=COSINE_SCALE * cos, provenance=PROVENANCE_COSINE)


def softmax_values(logit_values: np.ndarray) -> np.ndarray:
    """Row-wise exp-normalize with max subtraction; no overflow for any finite input."""
    z = logit_values - logit_values.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def softmax(logits: LogitMatrix) -> ProbabilityMatrix:
    return ProbabilityMatrix(values=softmax_values(logits.values))


def predict(probs: ProbabilityMatrix, labels: LabelVector) -> PredictionSet:
    """Argmax prediction per row; ties break toward the lowest class index."""
    if probs.n != len(labels):
        raise ShapeError(f"got {probs.n} probability rows but {len(labels)} labels")
    if probs.num_classes != labels.num_classes:
        raise ShapeError(
            f"got {probs.num_classes} probability columns but num_classes={labels.num_classes}"
        )
    predicted = probs.values.argmax(axis=1)
    confidence = probs.values.max(axis=1)
    correct = predicted == labels.labels
    return PredictionSet(predicted=predicted, confidence=confidence, correct=correct)
