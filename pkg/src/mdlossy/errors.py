"""Exception hierarchy.

``ValidationError`` subclasses signal bad inputs (CLI exit status 2);
``ComputationError`` subclasses signal a numerical procedure that could not
deliver a trustworthy answer (CLI exit status 3).
"""

from __future__ import annotations

from typing import Any


class ToolkitError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(ToolkitError, ValueError):
    pass


class ComputationError(ToolkitError, RuntimeError):
    """A computation failed; ``details`` holds a structured residual report."""

    def __init__(self, message: str, **details: Any) -> None:
        super().__init__(message)
        self.details = details

    def report(self) -> dict[str, Any]:
        out: dict[str, Any] = {"error": type(self).__name__, "message": str(self)}
        for key, val in self.details.items():
            try:
                out[key] = float(val)
            except (TypeError, ValueError):
                out[key] = val if isinstance(val, (str, int, bool, list, dict)) else repr(val)
        return out


class DomainError(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class AbsoluteContinuityViolation(ValidationError):
    pass


class InvalidExponent(ValidationError):
    pass


class InvalidScale(ValidationError):
    pass


class StepTooLarge(ValidationError):
    pass


class NonConvergence(ComputationError):
    pass


class BudgetExceeded(ComputationError):
    pass


class CrossCheckMismatch(ComputationError):
    pass


class DegenerateDispersion(ComputationError):
    pass


class InfeasibleRate(ComputationError):
    pass


class NoFeasibleType(ComputationError):
    pass


class BoundVacuous(ComputationError):
    pass
