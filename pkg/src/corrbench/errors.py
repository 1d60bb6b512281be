"""Exception hierarchy for the toolkit.

Every recoverable failure mode raises a subclass of ``CorrbenchError`` so
callers (and the CLI) can distinguish validation problems from genuine bugs.
"""

from __future__ import annotations


class CorrbenchError(Exception):
    """Base class for all toolkit errors."""


class InvalidParameterError(CorrbenchError):
    """A scalar argument is outside its documented domain."""


class InvalidKernelError(CorrbenchError):
    """A convolution kernel is malformed or too large for the image."""


class UnsupportedKindError(CorrbenchError):
    """An unknown corruption kind or noise/blur model was requested."""


class MissingAssetError(CorrbenchError):
    """An asset directory was supplied but contains no usable files."""


class EmptyEvaluationError(CorrbenchError):
    """No valid pixels (or no score records) were available to evaluate."""


class InvalidDepthError(CorrbenchError):
    """A depth map contains non-positive values where it is marked valid."""


class MisalignedCellsError(CorrbenchError):
    """Model and baseline measurement cells do not cover the same grid."""


class DegenerateBaselineError(CorrbenchError):
    """The baseline error sum is zero; the error ratio is undefined."""


class DegenerateCleanError(CorrbenchError):
    """The clean-set error is >= 1; the resilience denominator is undefined."""


class MissingCellsError(CorrbenchError):
    """A model does not cover every (kind, severity) cell of the profile."""

    def __init__(self, missing):
        self.missing = sorted(missing)
        pairs = ", ".join(f"({k}, {s})" for k, s in self.missing)
        super().__init__(f"missing measurement cells: {pairs}")


class MissingPredictionError(CorrbenchError):
    """A prediction file required for evaluation does not exist."""


class ShapeError(CorrbenchError):
    """Raster dimensions are incompatible beyond what the protocol resizes."""


class ProfileError(CorrbenchError):
    """Baseline, manifest, or request disagree on the benchmark profile."""


class SchemaVersionError(CorrbenchError):
    """A serialized document carries an unsupported schema version."""


class InvalidRequestError(CorrbenchError):
    """A harness request is structurally invalid (e.g. empty kind list)."""
