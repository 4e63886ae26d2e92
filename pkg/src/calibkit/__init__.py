"""Calibration toolkit for zero-shot image classifiers.

Cosine-similarity logits, reliability diagrams, expected calibration error,
and post-hoc calibrators including zero-shot-enabled temperature scaling:
one temperature per (architecture, pre-training dataset) pair, fit on an
auxiliary dataset and reused everywhere.
"""

from calibkit.calibrators import (
    BinningCalibrator,
    IsotonicCalibrator,
    TemperatureFit,
    apply_confidence_calibrator,
    apply_temperature,
    fit_histogram_binning,
    fit_isotonic,
    fit_temperature,
    fit_zero_shot_temperature,
    read_calibrator,
    temperature_sweep,
    write_calibrator,
)
from calibkit.errors import (
    CalibrationError,
    DegenerateEmbeddingError,
    FitError,
    FormatError,
    IoError,
    NonFiniteError,
    RangeError,
    ShapeError,
    TruncationError,
    ValidationError,
)
from calibkit.head import (
    LogitMatrix,
    PredictionSet,
    ProbabilityMatrix,
    cosine_logits,
    predict,
    softmax,
)
from calibkit.metrics import (
    EvalReport,
    ReliabilityTable,
    accuracy,
    ece,
    evaluate,
    nll,
    reliability_table,
)
from calibkit.synth import SynthSpec, generate
from calibkit.tensorio import (
    LabelVector,
    MatrixFile,
    TemperatureRecord,
    read_labels,
    read_matrix,
    read_temperature_record,
    write_labels,
    write_matrix,
    write_temperature_record,
)

__version__ = "0.1.0"
