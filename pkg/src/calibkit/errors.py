"""Exception hierarchy shared across the toolkit.

Usage/validation problems (bad values, malformed files, shape mismatches)
and runtime failures (I/O, failed fits) are kept in separate branches so
the CLI can map them to distinct exit codes.
"""


class CalibrationError(Exception):
    """Base class for all calibkit errors."""


class UsageError(CalibrationError):
    """Invalid input: bad values, malformed files, shape mismatches."""


class ComputeError(CalibrationError):
    """Runtime failure while computing or writing results."""


class FormatError(UsageError):
    """File does not follow the expected on-disk layout."""


class TruncationError(FormatError):
    """Payload shorter or longer than the header claims."""


class NonFiniteError(UsageError):
    """NaN or Inf encountered where finite values are required."""


class RangeError(UsageError):
    """Value outside its permitted range (labels, temperatures, bins)."""


class ShapeError(UsageError):
    """Mismatched dimensions between related inputs."""


class DegenerateEmbeddingError(UsageError):
    """An embedding row has zero norm; cosine similarity undefined."""


class ValidationError(UsageError):
    """A record or job is missing required fields."""


class FitError(ComputeError):
    """An optimization produced no usable result."""


class IoError(ComputeError):
    """Reading or writing a file failed."""
