"""Shared data containers: censored tail samples and confidence intervals."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

__all__ = ["TailData", "ConfidenceInterval"]


@dataclass(frozen=True)
class TailData:
    """A censored upper-tail sample.

    The ``m`` largest observations of the underlying sample are censored
    (only their count is known; if the censoring threshold ``T`` is known
    they were recorded as ``T``).  The next ``k`` order statistics were
    observed; ``exceedances`` stores them as distances above the tail
    cutoff ``u``, sorted in descending order.

    Attributes
    ----------
    exceedances : np.ndarray
        ``(k,)`` descending, nonnegative: observed order statistics minus u.
    m : int
        Number of censored observations above the observed block.
    k : int
        Number of observed exceedances (== len(exceedances)).
    u : float
        Tail cutoff; observations at or below u are not part of the tail.
    T : float or None
        Censoring threshold, if known.
    n : int
        Total sample size, n >= m + k.
    """

    exceedances: np.ndarray
    m: int
    u: float
    n: int
    T: float | None = None
    k: int = field(init=False)

    def __post_init__(self):
        exc = np.asarray(self.exceedances, dtype=float)
        object.__setattr__(self, "exceedances", exc)
        object.__setattr__(self, "k", int(exc.shape[0]))
        if exc.ndim != 1 or self.k < 1:
            raise ValidationError("exceedances must be a nonempty 1-D vector (k >= 1)")
        if self.m < 0:
            raise ValidationError("censored count m must be nonnegative")
        if np.any(exc < 0):
            raise ValidationError("exceedances must be nonnegative (observations above u)")
        if np.any(np.diff(exc) > 0):
            raise ValidationError("exceedances must be sorted in descending order")
        if self.n < self.m + self.k:
            raise ValidationError("total sample size n must be at least m + k")
        if self.T is not None and not np.all(exc < self.T - self.u):
            raise ValidationError("every observed exceedance must lie below T - u")

    @property
    def observed_values(self) -> np.ndarray:
        """The observed order statistics themselves (descending)."""
        return self.u + self.exceedances


@dataclass(frozen=True)
class ConfidenceInterval:
    """A one-dimensional confidence interval.

    ``method`` tags which procedure produced it: ``ml`` (censored maximum
    likelihood), ``fk`` (fixed-k small-sample), ``hill`` or ``gi``
    (baselines).  ``note`` carries degeneracy warnings (e.g. a point
    interval) without raising.
    """

    lo: float
    hi: float
    level: float
    method: str
    note: str | None = None

    def __post_init__(self):
        if not (0.0 < self.level < 1.0):
            raise ValidationError("confidence level must be in (0, 1)")
        if self.lo > self.hi:
            raise ValidationError("interval lower bound exceeds upper bound")
        if self.method not in ("ml", "fk", "hill", "gi"):
            raise ValidationError(f"unknown method tag: {self.method!r}")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi
