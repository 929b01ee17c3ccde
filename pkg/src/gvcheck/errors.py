"""Exception hierarchy for the verification engine.

Errors that carry a witness (a sample point exhibiting the failure) keep
it in the ``witness`` attribute so callers can surface it in reports.
"""
from __future__ import annotations


class GvError(Exception):
    """Base class for all engine errors."""


class ChartError(GvError):
    """Operands live on different coordinate charts."""


class DegreeError(GvError):
    """Form degrees are incompatible for the requested operation."""


class EvaluationError(GvError):
    """Numeric evaluation failed (division by zero, overflow, unbound name)."""

    def __init__(self, message, offender=None, point=None):
        super().__init__(message)
        self.offender = offender
        self.point = point


class DomainError(EvaluationError):
    """An atom was evaluated outside its domain (e.g. log of a non-positive value)."""


class SamplingError(GvError):
    """Rejection sampling of a region exhausted its attempt budget."""


class WitnessedError(GvError):
    """An error carrying a witness point."""

    def __init__(self, message, witness=None, detail=""):
        super().__init__(message)
        self.witness = witness
        self.detail = detail


class PreconditionError(WitnessedError):
    """A documented precondition of an operation failed."""


class CoverageError(WitnessedError):
    """A sampled point escaped the structure that was supposed to cover it."""


class GluingError(WitnessedError):
    """Piecewise data failed the vanishing condition needed to glue."""


class UnsupportedShapeError(GvError):
    """The input is valid but not of the restricted shape this solver handles."""
