"""Calibration diagnostics: reliability tables, ECE, accuracy, average NLL.

Binning follows the standard reliability-diagram convention: M equally
spaced bins over [0, 1], where bin 1 covers [0, 1/M] and bin m covers
((m-1)/M, m/M] for m >= 2. A sample whose confidence sits exactly on an
interior boundary m/M therefore belongs to bin m.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from calibkit.errors import RangeError, ShapeError
from calibkit.head import PredictionSet, ProbabilityMatrix, predict
from calibkit.tensorio import LabelVector

DEFAULT_NUM_BINS = 10

# Guard for log(0) on adversarial inputs; documented, not silent.
NLL_PROB_FLOOR = 1e-300


@dataclass(eq=False)
class ReliabilityTable:
    """Per-bin sample count, mean confidence, and accuracy.

    Empty bins carry mean_confidence = accuracy = 0 by convention; their
    weight in the ECE sum is zero, so the convention is observationally
    irrelevant but fixed for serialization.
    """

    num_bins: int
    counts: np.ndarray
    mean_confidence: np.ndarray
    accuracy: np.ndarray

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        self.mean_confidence = np.asarray(self.mean_confidence, dtype=np.float64)
        self.accuracy = np.asarray(self.accuracy, dtype=np.float64)
        if not (len(self.counts) == len(self.mean_confidence) == len(self.accuracy) == self.num_bins):
            raise ShapeError("per-bin arrays must all have length num_bins")

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    def to_dict(self) -> dict:
        return {
            "num_bins": self.num_bins,
            "counts": [int(v) for v in self.counts],
            "mean_confidence": [float(v) for v in self.mean_confidence],
            "accuracy": [float(v) for v in self.accuracy],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ReliabilityTable":
        return cls(
            num_bins=int(doc["num_bins"]),
            counts=np.asarray(doc["counts"]),
            mean_confidence=np.asarray(doc["mean_confidence"]),
            accuracy=np.asarray(doc["accuracy"]),
        )


@dataclass(eq=False)
class EvalReport:
    """Scalar calibration summary plus the reliability table it derives from."""

    ece: float
    accuracy: float
    nll: float
    table: ReliabilityTable
    n: int

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "accuracy": self.accuracy,
            "ece": self.ece,
            "nll": self.nll,
            "num_bins": self.table.num_bins,
            "table": self.table.to_dict(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "EvalReport":
        table = ReliabilityTable.from_dict(doc["table"])
        return cls(
            ece=float(doc["ece"]),
            accuracy=float(doc["accuracy"]),
            nll=float(doc["nll"]),
            table=table,
            n=int(doc["n"]),
        )


def bin_index(confidence: np.ndarray, num_bins: int) -> np.ndarray:
    """1-based bin assignment: smallest m with confidence <= m/M (bin 1 closed below)."""
    idx = np.ceil(np.asarray(confidence, dtype=np.float64) * num_bins).astype(np.int64)
    return np.clip(idx, 1, num_bins)


def reliability_table(preds: PredictionSet, num_bins: int = DEFAULT_NUM_BINS) -> ReliabilityTable:
    """Group samples by confidence into M equally spaced bins."""
    if num_bins < 1:
        raise RangeError(f"num_bins must be >= 1, got {num_bins}")
    idx = bin_index(preds.confidence, num_bins)
    counts = np.bincount(idx, minlength=num_bins + 1)[1:]
    conf_sums = np.bincount(idx, weights=preds.confidence, minlength=num_bins + 1)[1:]
    correct_sums = np.bincount(idx, weights=preds.correct.astype(np.float64), minlength=num_bins + 1)[1:]
    nonzero = counts > 0
    mean_conf = np.zeros(num_bins)
    acc = np.zeros(num_bins)
    mean_conf[nonzero] = conf_sums[nonzero] / counts[nonzero]
    acc[nonzero] = correct_sums[nonzero] / counts[nonzero]
    return ReliabilityTable(
        num_bins=num_bins, counts=counts, mean_confidence=mean_conf, accuracy=acc
    )


def ece(table: ReliabilityTable) -> float:
    """Bin-weighted mean absolute gap between bin confidence and bin accuracy."""
    n = table.n
    if n == 0:
        return 0.0
    weights = table.counts / n
    return float(np.sum(weights * np.abs(table.mean_confidence - table.accuracy)))


def accuracy(preds: PredictionSet) -> float:
    """Fraction of correct predictions."""
    return float(np.mean(preds.correct))


def nll_values(prob_values: np.ndarray, labels: np.ndarray) -> float:
    p_true = prob_values[np.arange(len(labels)), labels]
    return float(-np.mean(np.log(np.maximum(p_true, NLL_PROB_FLOOR))))


def nll(probs: ProbabilityMatrix, labels: LabelVector) -> float:
    """Average negative log-likelihood of the true class, in nats per sample.

    True-class probabilities are floored at 1e-300 before the log so
    adversarial inputs cannot produce infinities.
    """
    if probs.n != len(labels):
        raise ShapeError(f"got {probs.n} probability rows but {len(labels)} labels")
    if probs.num_classes != labels.num_classes:
        raise ShapeError(
            f"got {probs.num_classes} probability columns but num_classes={labels.num_classes}"
        )
    return nll_values(probs.values, labels.labels)


def evaluate(
    probs: ProbabilityMatrix, labels: LabelVector, num_bins: int = DEFAULT_NUM_BINS
) -> EvalReport:
    """Full calibration report: ECE, accuracy, NLL, and the reliability table."""
    preds = predict(probs, labels)
    table = reliability_table(preds, num_bins)
    return EvalReport(
        ece=ece(table),
        accuracy=accuracy(preds),
        nll=nll(probs, labels),
        table=table,
        n=len(preds),
    )
