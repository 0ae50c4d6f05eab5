"""Custom exceptions for quality-verify.

Every error raised by the library derives from QualityVerifyError so callers
(and the CLI) can catch the whole family at once. Errors tied to a file row
or a sequence position carry it and prefix the message with it.
"""

from typing import Optional


class QualityVerifyError(Exception):
    """Base class for all library errors."""

    def __init__(
        self,
        message: str,
        *,
        row: Optional[int] = None,
        index: Optional[int] = None,
    ):
        """Initialize the error.

        Args:
            message: Human readable description
            row: 1-based row of the offending file line, if any
            index: 0-based position in the offending sequence, if any
        """
        self.row = row
        self.index = index
        if row is not None:
            message = f"row {row}: {message}"
        elif index is not None:
            message = f"index {index}: {message}"
        super().__init__(message)


# Embedding errors

class EmbeddingError(QualityVerifyError):
    """Raised for invalid embedding vectors."""
    pass


class ZeroNormError(EmbeddingError):
    """Raised when a vector's L2 norm is numerically zero."""
    pass


class NonFiniteError(EmbeddingError):
    """Raised when a vector or score contains NaN or infinity."""
    pass


class DimensionMismatchError(EmbeddingError):
    """Raised when vectors of different dimension meet."""
    pass


# Scoring errors

class ScoringError(QualityVerifyError):
    """Raised for invalid scoring inputs."""
    pass


class NonPositiveQualityError(ScoringError):
    """Raised when a quality value is zero or negative."""
    pass


class EmptySetError(ScoringError):
    """Raised when a metric is asked of an empty score set."""
    pass


# Calibration errors

class CalibrationError(QualityVerifyError):
    """Raised when calibration cannot run on the given data."""
    pass


class InsufficientImpostersError(CalibrationError):
    """Raised when an FMR target is below 1 / number of imposter pairs."""
    pass


class InsufficientGenuineError(CalibrationError):
    """Raised when fewer than two genuine pairs are available."""
    pass


class DegeneratePointsError(CalibrationError):
    """Raised when the threshold/weight points cannot define a line."""
    pass


# Fusion errors

class FusionError(QualityVerifyError):
    """Raised when a template cannot be aggregated."""
    pass


class CancellationError(FusionError):
    """Raised when opposing frames cancel to a zero vector."""
    pass


class EmptyTemplateError(FusionError):
    """Raised when a template has no frames."""
    pass


# Data I/O errors

class DataIOError(QualityVerifyError):
    """Raised for malformed or inconsistent input files."""
    pass


class ParseError(DataIOError):
    """Raised when a file cannot be parsed."""
    pass


class DuplicateIdError(DataIOError):
    """Raised when an id appears twice where ids must be unique."""
    pass


class UnknownIdError(DataIOError):
    """Raised when a protocol or manifest references a missing sample."""
    pass


class MissingSubjectIdError(DataIOError):
    """Raised when subject ids are required but absent."""
    pass
