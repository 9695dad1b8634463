"""Exception types shared across the package.

The CLI maps these onto its exit-code contract: validation problems exit
with 2, numeric failures with 3, and I/O failures (plain ``OSError``) with 4.
"""


class XrayBenchError(Exception):
    """Base class for every error raised by this package."""


class ShapeError(XrayBenchError):
    """An array does not have the shape an operation requires."""


class InvalidArgument(XrayBenchError):
    """A caller-supplied value lies outside the accepted domain."""


class StateError(XrayBenchError):
    """An operation was applied to an object in the wrong state."""


class NumericError(XrayBenchError):
    """A computation produced or received non-finite values."""


class UndefinedMetricError(XrayBenchError):
    """The metric is undefined for the given inputs (e.g. one-class AUC)."""


class UndefinedCalibrationError(XrayBenchError):
    """Threshold calibration is impossible (e.g. one-class validation labels)."""


class DegeneratePrototypeError(XrayBenchError):
    """Prompt embeddings average to the zero vector."""


class FormatError(XrayBenchError):
    """An on-disk artifact violates its documented layout."""
