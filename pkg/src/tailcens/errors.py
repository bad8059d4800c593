"""Exception hierarchy.

Two error families matter to callers:

* ``ValidationError`` / ``DomainError`` -- the inputs are malformed or
  outside the mathematical domain of an operation.  The command line maps
  these to exit code 2.
* ``SolverError`` (and its ``QuadratureError`` subclass) -- the inputs were
  fine but an iterative routine failed to converge; the exception carries
  diagnostics.  The command line maps these to exit code 3.
"""

from __future__ import annotations

__all__ = ["ValidationError", "DomainError", "SolverError", "QuadratureError"]


class ValidationError(ValueError):
    """Malformed input data or arguments (wrong shapes, inconsistent flags)."""


class DomainError(ValueError):
    """A numeric argument lies outside the domain of the requested function."""


class SolverError(RuntimeError):
    """An iterative solver failed to converge.

    ``diagnostics`` holds solver state useful for a post-mortem (last
    deviation profile, iteration counts, ...).
    """

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class QuadratureError(SolverError):
    """Numerical integration did not reach the requested accuracy."""
