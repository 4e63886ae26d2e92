"""Post-hoc calibrators: temperature scaling, histogram binning, isotonic regression.

Temperature fitting minimizes the average cross-entropy of softmax(logits / T)
over T in [0.05, 20] with a 200-point log-spaced grid scan followed by
golden-section refinement; a derivative-free bracketed search is robust to
the mild non-convexity of the objective and reproduces bit-for-bit.

The zero-shot-enabled workflow fits one temperature per (architecture,
pre-training dataset) pair on an auxiliary labeled dataset and persists it as
a TemperatureRecord for reuse on any downstream dataset or prompt.

Histogram binning and isotonic regression calibrate the top-label confidence
only (the quantity entering ECE), not per-class probabilities.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from calibkit.errors import FitError, FormatError, RangeError, ShapeError
from calibkit.head import LogitMatrix, PredictionSet, ProbabilityMatrix, predict, softmax_values
from calibkit.metrics import (
    DEFAULT_NUM_BINS,
    bin_index,
    ece,
    nll_values,
    reliability_table,
)
from calibkit.tensorio import LabelVector, TemperatureRecord, _read_json, _write_json

FIT_T_MIN = 0.05
FIT_T_MAX = 20.0
FIT_GRID_POINTS = 200
FIT_REFINE_TOL = 1e-4

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(eq=False)
class TemperatureFit:
    """Result of a supervised temperature fit, with the grid trace that found it."""

    temperature: float
    nll_at_fit: float
    sweep_trace: list[tuple[float, float]] | None = None


@dataclass(eq=False)
class BinningCalibrator:
    """Maps confidence to the empirical accuracy of its bin on the calibration set."""

    num_bins: int
    mapped_confidence: np.ndarray

    def __post_init__(self):
        self.mapped_confidence = np.asarray(self.mapped_confidence, dtype=np.float64)
        if self.num_bins < 1:
            raise RangeError(f"num_bins must be >= 1, got {self.num_bins}")
        if self.mapped_confidence.shape != (self.num_bins,):
            raise ShapeError("mapped_confidence must have one entry per bin")
        if ((self.mapped_confidence < 0) | (self.mapped_confidence > 1)).any():
            raise RangeError("mapped confidences must lie in [0, 1]")


@dataclass(eq=False)
class IsotonicCalibrator:
    """Stepwise-constant non-decreasing confidence map fitted by PAVA."""

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.breakpoints = np.asarray(self.breakpoints, dtype=np.float64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.breakpoints.ndim != 1 or self.breakpoints.shape != self.values.shape:
            raise ShapeError("breakpoints and values must be 1-D and equally long")
        if self.breakpoints.size < 1:
            raise ShapeError("isotonic calibrator needs at least one knot")
        if (np.diff(self.breakpoints) <= 0).any():
            raise RangeError("breakpoints must be strictly increasing")
        if (np.diff(self.values) < 0).any():
            raise RangeError("isotonic values must be non-decreasing")
        if ((self.values < 0) | (self.values > 1)).any():
            raise RangeError("isotonic values must lie in [0, 1]")


def apply_temperature(logits: LogitMatrix, temperature: float) -> LogitMatrix:
    """Divide every logit by T; provenance is preserved, predictions never change."""
    if not np.isfinite(temperature) or temperature <= 0:
        raise RangeError(f"temperature must be finite and > 0, got {temperature}")
    return LogitMatrix(values=logits.values / temperature, provenance=logits.provenance)


def _check_fit_shapes(logits: LogitMatrix, labels: LabelVector) -> None:
    if logits.n != len(labels):
        raise ShapeError(f"got {logits.n} logit rows but {len(labels)} labels")
    if logits.num_classes != labels.num_classes:
        raise ShapeError(
            f"got {logits.num_classes} logit columns but num_classes={labels.num_classes}"
        )


def scaled_nll(logits: LogitMatrix, labels: LabelVector, temperature: float) -> float:
    """Average NLL of softmax(logits / T) against the labels."""
    if not np.isfinite(temperature) or temperature <= 0:
        raise RangeError(f"temperature must be finite and > 0, got {temperature}")
    return nll_values(softmax_values(logits.values / temperature), labels.labels)


def _golden_section(f, lo: float, hi: float, tol: float) -> float:
    """Minimize a unimodal f on [lo, hi] to bracket width tol."""
    x1 = hi - _INVPHI * (hi - lo)
    x2 = lo + _INVPHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INVPHI * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INVPHI * (hi - lo)
            f2 = f(x2)
    return 0.5 * (lo + hi)


def fit_temperature(
    logits: LogitMatrix, labels: LabelVector, keep_trace: bool = True
) -> TemperatureFit:
    """Fit T by minimizing the cross-entropy of softmax(logits / T).

    Grid scan over 200 log-spaced points in [0.05, 20], then golden-section
    refinement around the best grid point to |dT| < 1e-4. Grid ties resolve
    toward the smaller T. Warns when there are fewer samples than classes.
    """
    _check_fit_shapes(logits, labels)
    if logits.n < logits.num_classes:
        warnings.warn(
            f"fitting a temperature on {logits.n} samples with {logits.num_classes} classes; "
            "the fit is noisy below one sample per class",
            UserWarning,
            stacklevel=2,
        )
    grid = np.logspace(math.log10(FIT_T_MIN), math.log10(FIT_T_MAX), FIT_GRID_POINTS)
    nlls = np.array([scaled_nll(logits, labels, t) for t in grid])
    if not np.isfinite(nlls).any():
        raise FitError("NLL is non-finite at every grid temperature")
    best = int(np.nanargmin(nlls))
    lo = grid[best - 1] if best > 0 else grid[0]
    hi = grid[best + 1] if best < len(grid) - 1 else grid[-1]
    t_refined = _golden_section(lambda t: scaled_nll(logits, labels, t), lo, hi, FIT_REFINE_TOL)
    nll_refined = scaled_nll(logits, labels, t_refined)
    if nlls[best] < nll_refined:
        t_refined, nll_refined = float(grid[best]), float(nlls[best])
    trace = [(float(t), float(v)) for t, v in zip(grid, nlls)] if keep_trace else None
    return TemperatureFit(
        temperature=float(t_refined), nll_at_fit=float(nll_refined), sweep_trace=trace
    )


def fit_zero_shot_temperature(
    aux_logits: LogitMatrix,
    aux_labels: LabelVector,
    architecture: str,
    pretrain_dataset: str,
    auxiliary_dataset: str = "",
    prompt_template: str = "",
    created_at: str = "",
) -> TemperatureRecord:
    """Fit T on an auxiliary dataset and tag it with the model identity.

    The record is the entire deliverable: it applies to any downstream
    dataset or prompt for the same (architecture, pre-training dataset)
    pair with no further fitting.
    """
    fit = fit_temperature(aux_logits, aux_labels, keep_trace=False)
    return TemperatureRecord(
        temperature=fit.temperature,
        architecture=architecture,
        pretrain_dataset=pretrain_dataset,
        auxiliary_dataset=auxiliary_dataset,
        prompt_template=prompt_template,
        fit_nll=fit.nll_at_fit,
        created_at=created_at,
    )


def fit_histogram_binning(
    preds: PredictionSet, num_bins: int = DEFAULT_NUM_BINS
) -> BinningCalibrator:
    """Map each confidence bin to its empirical accuracy on the calibration set.

    Empty bins fall back to the bin midpoint (deterministic, documented).
    """
    table = reliability_table(preds, num_bins)
    midpoints = (np.arange(num_bins) + 0.5) / num_bins
    mapped = np.where(table.counts > 0, table.accuracy, midpoints)
    return BinningCalibrator(num_bins=num_bins, mapped_confidence=mapped)


def _pava(weights: np.ndarray, target_sums: np.ndarray) -> np.ndarray:
    """Weighted pool-adjacent-violators: least-squares non-decreasing fit.

    Each knot i carries (weight, sum-of-targets); block means are compared by
    cross-multiplication, so for integer-valued sums the only rounding is the
    single final division per block.
    """
    blocks: list[list[float]] = []  # [weight, sum, knot span]
    for w, s in zip(weights, target_sums):
        blocks.append([float(w), float(s), 1.0])
        while len(blocks) > 1 and blocks[-2][1] * blocks[-1][0] > blocks[-1][1] * blocks[-2][0]:
            w2, s2, k2 = blocks.pop()
            blocks[-1][0] += w2
            blocks[-1][1] += s2
            blocks[-1][2] += k2
    return np.repeat([s / w for w, s, _ in blocks], [int(k) for _, _, k in blocks])


def fit_isotonic(preds: PredictionSet) -> IsotonicCalibrator:
    """PAVA over (confidence, correctness) pairs sorted by confidence.

    Ties in confidence are pre-pooled (a confidence map cannot separate
    them); the result is the least-squares non-decreasing fit.
    """
    order = np.argsort(preds.confidence, kind="stable")
    conf = preds.confidence[order]
    correct = preds.correct[order].astype(np.float64)
    knots, start = np.unique(conf, return_index=True)
    correct_sums = np.add.reduceat(correct, start)
    counts = np.diff(np.append(start, len(conf))).astype(np.float64)
    values = _pava(counts, correct_sums)
    return IsotonicCalibrator(breakpoints=knots, values=values)


def apply_confidence_calibrator(
    calibrator: BinningCalibrator | IsotonicCalibrator, preds: PredictionSet
) -> PredictionSet:
    """Remap confidences through the fitted calibrator; predictions are untouched.

    Isotonic maps use stepwise-constant extension: the value of the nearest
    knot at or below the confidence, and the first knot's value below all knots.
    """
    if isinstance(calibrator, BinningCalibrator):
        idx = bin_index(preds.confidence, calibrator.num_bins)
        new_conf = calibrator.mapped_confidence[idx - 1]
    elif isinstance(calibrator, IsotonicCalibrator):
        pos = np.searchsorted(calibrator.breakpoints, preds.confidence, side="right") - 1
        new_conf = calibrator.values[np.clip(pos, 0, None)]
    else:
        raise TypeError(f"unsupported calibrator type {type(calibrator).__name__}")
    return PredictionSet(
        predicted=preds.predicted.copy(), confidence=new_conf, correct=preds.correct.copy()
    )


def temperature_sweep(
    logits: LogitMatrix,
    labels: LabelVector,
    grid: list[float] | np.ndarray,
    num_bins: int = DEFAULT_NUM_BINS,
    max_workers: int = 1,
) -> list[tuple[float, float, float]]:
    """Evaluate (ECE, NLL) at each grid temperature; trace order follows the grid."""
    _check_fit_shapes(logits, labels)
    grid = [float(t) for t in grid]
    for t in grid:
        if not np.isfinite(t) or t <= 0:
            raise RangeError(f"sweep grid temperatures must be finite and > 0, got {t}")

    def point(t: float) -> tuple[float, float, float]:
        probs = ProbabilityMatrix(values=softmax_values(logits.values / t))
        preds = predict(probs, labels)
        table = reliability_table(preds, num_bins)
        return t, ece(table), nll_values(probs.values, labels.labels)

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(point, grid))
    return [point(t) for t in grid]


def write_calibrator(
    calibrator: BinningCalibrator | IsotonicCalibrator, path: str | Path
) -> None:
    if isinstance(calibrator, BinningCalibrator):
        doc = {
            "kind": "histogram_binning",
            "num_bins": calibrator.num_bins,
            "mapped_confidence": [float(v) for v in calibrator.mapped_confidence],
        }
    elif isinstance(calibrator, IsotonicCalibrator):
        doc = {
            "kind": "isotonic",
            "breakpoints": [float(v) for v in calibrator.breakpoints],
            "values": [float(v) for v in calibrator.values],
        }
    else:
        raise TypeError(f"unsupported calibrator type {type(calibrator).__name__}")
    _write_json(doc, path)


def read_calibrator(path: str | Path) -> BinningCalibrator | IsotonicCalibrator:
    doc = _read_json(path)
    kind = doc.get("kind")
    if kind == "histogram_binning":
        return BinningCalibrator(
            num_bins=int(doc["num_bins"]),
            mapped_confidence=np.asarray(doc["mapped_confidence"]),
        )
    if kind == "isotonic":
        return IsotonicCalibrator(
            breakpoints=np.asarray(doc["breakpoints"]), values=np.asarray(doc["values"])
        )
    raise FormatError(f"{path}: unknown calibrator kind {kind!r}")
