"""The fixed-k limit experiment: exact joint law of the largest order statistics.

When the upper tail of a sample is governed by an extreme-value index xi,
the joint law of the top order statistics -- after location/scale norming --
converges, for FIXED tail count k, to an exact finite-dimensional limit.
With the m largest values censored and the next k observed, the limit law of
the observed block X = (X_{m+1}, ..., X_{m+k}) has density

    f_X(x) = (1/m!) * (1 + xi*x_{m+1})^{-m/xi}
             * exp(-(1 + xi*x_{m+k})^{-1/xi})
             * prod_{i=1}^{k} (1 + xi*x_{m+i})^{-1/xi - 1}

on the descending cone (the top points of a Poisson process with tail
intensity (1 + xi*x)^{-1/xi}, the m censored positions integrated out).  Location and scale are nuisance parameters; the
maximal invariant X* = (X - X_{m+k}) / (X_{m+1} - X_{m+k}) removes them,
pinning the first coordinate to 1 and the last to 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..data import TailData
from ..distributions import XI_EPS
from ..errors import DomainError, ValidationError

__all__ = [
    "SelfNormalized",
    "self_normalize",
    "simulate_tail_ev",
    "joint_density_fx",
]


@dataclass(frozen=True)
class SelfNormalized:
    """A self-normalized block of k observed order statistics.

    ``values`` is descending with values[0] == 1 and values[-1] == 0;
    ``m`` is the number of (larger, censored) order statistics above it.
    """

    values: np.ndarray
    m: int
    k: int = field(init=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "k", len(v))
        if self.k < 3:
            raise ValidationError("self-normalized blocks need k >= 3")
        if self.m < 0:
            raise ValidationError("m must be nonnegative")
        if v[0] != 1.0 or v[-1] != 0.0:
            raise ValidationError("values must start at 1 and end at 0")
        if np.any(np.diff(v) > 0):
            raise ValidationError("values must be weakly decreasing")


def self_normalize(data, m: int | None = None) -> SelfNormalized:
    """Map an observed tail block to its location/scale maximal invariant.

    Accepts a :class:`TailData` (m is taken from it) or a descending vector
    of k observed order statistics together with ``m``.
    """
    if isinstance(data, TailData):
        values = data.observed_values
        m = data.m
    else:
        values = np.asarray(data, dtype=float)
        if m is None:
            raise ValidationError("m is required when passing a raw vector")
    if values.ndim != 1 or len(values) < 3:
        raise ValidationError("need at least k >= 3 observed order statistics")
    if np.any(np.diff(values) > 0):
        raise ValidationError("observed order statistics must be descending")
    spread = values[0] - values[-1]
    if spread <= 0:
        raise DomainError("degenerate block: largest and smallest observed values coincide")
    return SelfNormalized((values - values[-1]) / spread, int(m))


def simulate_tail_ev(
    xi: float, m: int, k: int, rng: np.random.Generator, size: int | None = None
) -> np.ndarray:
    """Draw the observed block (X_{m+1}, ..., X_{m+k}) from the limit law.

    Uses the normalized-partial-sum representation of extreme order
    statistics: with Gamma_i the successive sums of i.i.d. standard
    exponentials, ((Gamma_i)^{-xi} - 1)/xi, i = m+1, ..., m+k is distributed
    exactly as the observed block.  Returns shape (k,) or (size, k).
    """
    if k < 1 or m < 0:
        raise ValidationError("need k >= 1 and m >= 0")
    n = 1 if size is None else int(size)
    gam = np.cumsum(rng.standard_exponential((n, m + k)), axis=1)[:, m:]
    if abs(xi) < XI_EPS:
        x = -np.log(gam)
    else:
        x = np.expm1(-xi * np.log(gam)) / xi
    return x[0] if size is None else x


def _log_joint_density_fx(block: np.ndarray, xi: float, m: int) -> float:
    if np.any(np.diff(block) > 0):
        return -math.inf
    if abs(xi) < XI_EPS:
        top = block[0]
        return (
            -math.lgamma(m + 1)
            - m * top
            - math.exp(-block[-1])
            - float(np.sum(block))
        )
    w = 1.0 + xi * block
    if np.any(w <= 0):
        return -math.inf
    lw = np.log(w)
    return (
        -math.lgamma(m + 1)
        - (m / xi) * lw[0]
        - math.exp(-lw[-1] / xi)
        - (1.0 + 1.0 / xi) * float(np.sum(lw))
    )


def joint_density_fx(x: np.ndarray, xi: float, m: int) -> float:
    """Density of the observed block of the limit experiment at ``x``.

    ``x`` is the full descending (m+k)-vector; the first m coordinates are
    the censored positions, whose values do not enter the density (they are
    integrated out) -- only their ordering is checked.  Returns 0 outside
    the descending support cone.
    """
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise ValidationError("x must be a one-dimensional vector")
    if m < 0:
        raise ValidationError("m must be nonnegative")
    if len(v) < m + 1:
        raise ValidationError("x must contain at least one observed coordinate (length m+k)")
    if m > 0 and np.any(np.diff(v[: m + 1]) > 0):
        return 0.0
    lf = _log_joint_density_fx(v[m:], float(xi), int(m))
    return math.exp(lf) if lf > -math.inf else 0.0
