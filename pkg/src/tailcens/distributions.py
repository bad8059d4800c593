"""Generalized Pareto and limiting extreme-value laws, plus simulation DGPs.

Houses the exact distribution functions used throughout the package:

* the generalized Pareto distribution (GPD) with shape ``xi`` and scale
  ``sigma`` -- the limiting law of exceedances over a high threshold;
* the extreme-value limit law of the sample maximum,
  ``V_xi(x) = exp(-(1 + xi*x)**(-1/xi))``;
* the four heavy-tailed data-generating processes used by the Monte Carlo
  harness (GPD, |t(2)|, F(4,4), double-Pareto-lognormal), all with true
  tail index 0.5, together with their exact quantiles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special, stats

from .errors import DomainError, ValidationError

__all__ = [
    "XI_EPS",
    "GpdParams",
    "DgpSpec",
    "gpd_cdf",
    "gpd_quantile",
    "ev_cdf",
    "dgp_sample",
    "dgp_true_quantile",
]

# Below this |xi| the exponential / Gumbel branch is used; the two branches
# agree to ~1e-8 relative there, so the switch is continuous in practice.
XI_EPS = 1e-8


@dataclass(frozen=True)
class GpdParams:
    """GPD shape/scale pair.

    Support is ``(0, inf)`` when ``xi >= 0`` and ``(0, -sigma/xi)`` when
    ``xi < 0``.  ``alpha = 1/xi`` is the Pareto exponent.
    """

    xi: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValidationError("GPD scale sigma must be positive")

    @property
    def alpha(self) -> float:
        """Pareto exponent, the reciprocal of the tail index."""
        if abs(self.xi) < XI_EPS:
            return math.inf
        return 1.0 / self.xi

    @property
    def support_upper(self) -> float:
        return math.inf if self.xi >= 0 else -self.sigma / self.xi


def gpd_cdf(y, p: GpdParams):
    """GPD distribution function G(y; xi, sigma).

    ``G(y) = 1 - (1 + xi*y/sigma)**(-1/xi)`` for ``xi != 0`` and
    ``1 - exp(-y/sigma)`` in the exponential limit ``xi -> 0``.
    Raises DomainError when y is outside the support.
    """
    y_arr = np.asarray(y, dtype=float)
    if np.any(y_arr < 0) or np.any(y_arr > p.support_upper):
        raise DomainError("y outside the GPD support")
    if abs(p.xi) < XI_EPS:
        out = -np.expm1(-y_arr / p.sigma)
    else:
        # at the upper endpoint of a short-tailed (xi < 0) support the inner
        # log1p(-1) is -inf and the CDF is exactly 1
        with np.errstate(divide="ignore"):
            out = -np.expm1(np.log1p(p.xi * y_arr / p.sigma) * (-1.0 / p.xi))
    return out if out.ndim else float(out)


def gpd_quantile(q, p: GpdParams):
    """Inverse of :func:`gpd_cdf`: ``(sigma/xi) * ((1-q)**(-xi) - 1)``."""
    q_arr = np.asarray(q, dtype=float)
    if np.any(q_arr < 0) or np.any(q_arr >= 1):
        raise DomainError("quantile order must lie in [0, 1)")
    if abs(p.xi) < XI_EPS:
        out = -p.sigma * np.log1p(-q_arr)
    else:
        out = (p.sigma / p.xi) * np.expm1(-p.xi * np.log1p(-q_arr))
    return out if out.ndim else float(out)


def ev_cdf(x, xi: float):
    """CDF of the extreme-value limit of the sample maximum.

    ``V_xi(x) = exp(-(1 + xi*x)**(-1/xi))`` on ``1 + xi*x > 0``, with the
    Gumbel branch ``exp(-exp(-x))`` when ``|xi|`` is below ``XI_EPS``.
    """
    x_arr = np.asarray(x, dtype=float)
    if abs(xi) < XI_EPS:
        out = np.exp(-np.exp(-x_arr))
    else:
        z = 1.0 + xi * x_arr
        if np.any(z <= 0):
            raise DomainError("ev_cdf requires 1 + xi*x > 0")
        out = np.exp(-np.exp(np.log(z) * (-1.0 / xi)))
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Data-generating processes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DgpSpec:
    """One of the four simulation data-generating processes.

    kind:
      * ``"gpd"``    -- Pareto law ``Y = (sigma/xi) * (1-U)**(-xi)`` with
                        survival function ``(y * xi/sigma)**(-1/xi)`` on
                        ``[sigma/xi, inf)``; defaults (0.5, 1).  Exceedances
                        over any threshold ``u >= sigma/xi`` are exactly
                        GPD(xi, xi*u), so threshold fits to this process are
                        exactly correctly specified.  Requires ``xi > 0``.
      * ``"abs_t2"`` -- |t(2)|, absolute value of a Student-t with 2 df
      * ``"f44"``    -- F(4, 4)
      * ``"dpln"``   -- double-Pareto-lognormal:
                        ``Y = exp(c1 + c2*Z1 + xi*Z2 - c3*Z3)`` with Z1
                        standard normal and Z2, Z3 unit exponentials;
                        defaults c1=0, c2=0.5, xi=0.5, c3=1.

    Every kind has true tail index 0.5 at the default constants.
    """

    kind: str
    xi: float = 0.5
    sigma: float = 1.0
    c1: float = 0.0
    c2: float = 0.5
    c3: float = 1.0

    _KINDS = ("gpd", "abs_t2", "f44", "dpln")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValidationError(f"unknown DGP kind {self.kind!r}; expected one of {self._KINDS}")
        if self.kind in ("gpd", "dpln") and not self.xi > 0.0:
            raise ValidationError(f"DGP kind {self.kind!r} requires xi > 0, got {self.xi}")
        if self.kind == "gpd" and not self.sigma > 0.0:
            raise ValidationError(f"DGP kind 'gpd' requires sigma > 0, got {self.sigma}")

    @classmethod
    def gpd(cls, xi: float = 0.5, sigma: float = 1.0) -> "DgpSpec":
        return cls("gpd", xi=xi, sigma=sigma)

    @classmethod
    def abs_t2(cls) -> "DgpSpec":
        return cls("abs_t2")

    @classmethod
    def f44(cls) -> "DgpSpec":
        return cls("f44")

    @classmethod
    def dpln(cls, c1: float = 0.0, c2: float = 0.5, xi: float = 0.5, c3: float = 1.0) -> "DgpSpec":
        return cls("dpln", xi=xi, c1=c1, c2=c2, c3=c3)

    @property
    def true_xi(self) -> float:
        """Exact tail index of the process (0.5 for every default kind)."""
        if self.kind in ("gpd", "dpln"):
            return self.xi
        # |t(nu)| has tail index 1/nu; F(d1, d2) has tail index 2/d2.
        return 0.5


def dgp_sample(spec: DgpSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` i.i.d. values from the process described by ``spec``."""
    if n < 1:
        raise ValidationError("sample size must be at least 1")
    if spec.kind == "gpd":
        u = rng.random(n)
        return (spec.sigma / spec.xi) * np.exp(-spec.xi * np.log1p(-u))
    if spec.kind == "abs_t2":
        return np.abs(rng.standard_t(2, size=n))
    if spec.kind == "f44":
        return rng.f(4, 4, size=n)
    # double-Pareto-lognormal
    z1 = rng.standard_normal(n)
    z2 = rng.standard_exponential(n)
    z3 = rng.standard_exponential(n)
    return np.exp(spec.c1 + spec.c2 * z1 + spec.xi * z2 - spec.c3 * z3)


# -- double-Pareto-lognormal CDF --------------------------------------------
#
# ln Y = c1 + W - c3*Z3 where W = c2*Z1 + xi*Z2 is a normal + exponential
# convolution with the closed-form CDF
#   P(W <= w) = Phi(w/c2) - exp(c2^2/(2 xi^2) - w/xi) * Phi(w/c2 - c2/xi),
# so P(ln Y <= x) = Int_0^inf e^{-z} P(W <= x - c1 + c3 z) dz, a smooth
# one-dimensional integral evaluated by adaptive quadrature.


def _emg_cdf(w, c2: float, xi: float):
    w = np.asarray(w, dtype=float)
    t1 = special.ndtr(w / c2)
    log_t2 = c2 * c2 / (2.0 * xi * xi) - w / xi + special.log_ndtr(w / c2 - c2 / xi)
    out = t1 - np.exp(log_t2)
    return np.clip(out, 0.0, 1.0)


def _dpln_log_cdf_arg(x: float, spec: DgpSpec) -> float:
    val, _ = integrate.quad(
        lambda z: math.exp(-z) * float(_emg_cdf(x - spec.c1 + spec.c3 * z, spec.c2, spec.xi)),
        0.0,
        np.inf,
        epsabs=1e-11,
        epsrel=1e-10,
        limit=200,
    )
    return min(max(val, 0.0), 1.0)


_DPLN_QUANTILE_CACHE: dict[tuple, float] = {}


def _dpln_quantile(spec: DgpSpec, q: float) -> float:
    key = (spec.c1, spec.c2, spec.xi, spec.c3, q)
    if key not in _DPLN_QUANTILE_CACHE:
        x = optimize.brentq(
            lambda t: _dpln_log_cdf_arg(t, spec) - q,
            -60.0,
            120.0,
            xtol=1e-11,
            rtol=1e-13,
        )
        _DPLN_QUANTILE_CACHE[key] = math.exp(x)
    return _DPLN_QUANTILE_CACHE[key]


def dgp_true_quantile(spec: DgpSpec, q: float) -> float:
    """Exact q-quantile of the process (relative accuracy better than 1e-6)."""
    if not (0.0 < q < 1.0):
        raise DomainError("quantile order must lie in (0, 1)")
    if spec.kind == "gpd":
        return float((spec.sigma / spec.xi) * (1.0 - q) ** (-spec.xi))
    if spec.kind == "abs_t2":
        return float(stats.t(2).ppf(0.5 * (1.0 + q)))
    if spec.kind == "f44":
        return float(stats.f(4, 4).ppf(q))
    return _dpln_quantile(spec, q)
