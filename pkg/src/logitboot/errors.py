"""Exception types shared across the package."""

from __future__ import annotations


class DimensionMismatchError(ValueError):
    """Vector or matrix arguments have incompatible shapes."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class DegenerateResponseError(ValueError):
    """The response vector is all zeros or all ones, so no finite MLE exists."""


class SeparationError(ArithmeticError):
    """Iterates diverged or the information matrix is numerically singular.

    Raised when a coefficient magnitude crosses the divergence bound during
    iteration (perfect or quasi-separation pushes the MLE to infinity) or
    when the observed information is too ill-conditioned to invert
    (collinear predictor columns).
    """


class NotConvergedError(ValueError):
    """An operation required a converged fit but received an unconverged one."""


class InsufficientReplicatesError(ValueError):
    """Too few surviving bootstrap replicates for the requested interval."""


class ResamplingInstabilityError(RuntimeError):
    """More than half of the bootstrap replicates failed to produce a fit."""


class SchemaError(ValueError):
    """Input file lacks required structure: header, columns, or data rows."""


class ParseError(ValueError):
    """A cell failed to parse or violated its domain.

    ``row`` is the 1-based data-row number; the header line is row 0 and is
    never cited by this error.
    """

    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row


class UnknownPredictorError(ValueError):
    """A profile or request referenced a predictor the model does not have."""
