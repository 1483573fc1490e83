"""Exception types shared across the package."""

from __future__ import annotations


class MmbmError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(MmbmError, ValueError):
    """An input violates a documented precondition.

    The ``check`` attribute names the violated property so callers can
    dispatch on it without parsing the message.
    """

    def __init__(self, check: str, message: str):
        super().__init__(f"{check}: {message}")
        self.check = check


class SolverError(MmbmError, RuntimeError):
    """A numerical routine could not produce a trustworthy result."""


class ConvergenceError(SolverError):
    """An iteration hit its cap or stalled above the residual tolerance."""

    def __init__(self, message: str, residual: float | None = None,
                 iterations: int | None = None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class SubspaceSelectionError(SolverError):
    """Eigenvalue selection for an invariant subspace was ambiguous."""

    def __init__(self, message: str, eigenvalue: complex | None = None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class StabilityError(SolverError):
    """A matrix that must be strictly stable has spectrum touching the axis."""
