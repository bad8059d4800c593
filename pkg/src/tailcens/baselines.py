"""Classical tail-index estimators used as comparison baselines.

Both estimators consume the largest ``k+1`` order statistics of the sample
(descending).  Censored observations, when present, simply enter at the
censoring threshold -- the estimators are applied as a practitioner unaware
of the censoring mechanism would apply them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .data import ConfidenceInterval
from .errors import DomainError, ValidationError

__all__ = ["BaselineFit", "hill", "gi"]


@dataclass(frozen=True)
class BaselineFit:
    """Point estimate and standard error from a baseline tail estimator."""

    xi_hat: float
    se: float
    k_used: int
    method: str

    def ci(self, level: float = 0.95) -> ConfidenceInterval:
        z = float(stats.norm.ppf(1.0 - (1.0 - level) / 2.0))
        return ConfidenceInterval(
            self.xi_hat - z * self.se, self.xi_hat + z * self.se, level, self.method
        )


def _top_order_stats(sorted_sample: np.ndarray, k: int) -> np.ndarray:
    y = np.asarray(sorted_sample, dtype=float)
    if y.ndim != 1:
        raise ValidationError("sorted_sample must be a one-dimensional vector")
    if k < 2:
        raise ValidationError("baseline estimators need k >= 2")
    if len(y) < k + 1:
        raise ValidationError("sorted_sample must contain at least k+1 values")
    head = y[: k + 1]
    if np.any(np.diff(head) > 0):
        raise ValidationError("sorted_sample must be sorted in descending order")
    if head[k] <= 0:
        raise DomainError("the (k+1)-th largest value must be positive")
    return head


def hill(sorted_sample: np.ndarray, k: int) -> BaselineFit:
    """Hill estimator: mean log-spacing of the top k values over Y_(k+1)."""
    head = _top_order_stats(sorted_sample, k)
    xi_hat = float(np.mean(np.log(head[:k] / head[k])))
    return BaselineFit(xi_hat, xi_hat / math.sqrt(k), k, "hill")


def gi(sorted_sample: np.ndarray, k: int) -> BaselineFit:
    """Log-rank regression estimator of the tail index.

    Regresses log(rank - 1/2) on log(value) over the top k order statistics;
    the tail index estimate is the negative reciprocal slope, with standard
    error xi_hat * sqrt(2/k).
    """
    head = _top_order_stats(sorted_sample, k)
    ranks = np.arange(1, k + 1, dtype=float)
    x = np.log(head[:k])
    yr = np.log(ranks - 0.5)
    xc = x - x.mean()
    denom = float(np.sum(xc * xc))
    if denom <= 0:
        raise DomainError("degenerate regression: top k values are identical")
    slope = float(np.sum(xc * (yr - yr.mean())) / denom)
    if slope >= 0:
        raise DomainError("log-rank regression slope is nonnegative; no heavy tail")
    xi_hat = -1.0 / slope
    return BaselineFit(xi_hat, xi_hat * math.sqrt(2.0 / k), k, "gi")
