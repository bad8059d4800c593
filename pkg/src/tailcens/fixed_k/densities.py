"""Densities of the self-normalized limit experiment.

Three integral families, each a one-dimensional integral over the scale
variable left after reducing the location/scale group:

* ``density_fxstar``  -- density of the maximal invariant X*,
      f(x*) = Gamma(k+m)/m! * xi^{-(k-1)}
              * Int_0^inf t^{k-2} (1+t)^{-m/xi} prod_i (1+t*x*_i)^{-1/xi-1} dt

* ``kappa_density``   -- expected-spread-weighted density, the length-cost
  kernel of the quantile-set program (E[(X_{m+1}-X_{m+k}) ; X* = x*]),
      Gamma(k+m-xi)/m! * xi^{-k}
              * Int_0^inf t^{k-1} (1+t)^{-m/xi} prod_i (1+t*x*_i)^{-1/xi-1} dt

* ``joint_density_ystar_xstar`` -- joint density of (Y*, X*) where
  Y* = (q - X_{m+k})/(X_{m+1} - X_{m+k}) is the self-normalized position of
  the target quantile with exceedance parameter h (q = (h^{-xi}-1)/xi),
      1/m! * Int_0^inf a^{k-1} (w+xi*a)^{-m/xi} exp(-w^{-1/xi})
                       * prod_i (w + xi*a*x*_i)^{-1/xi-1} da,
  with w = h^{-xi} - xi*a*y, integrated over a such that w > 0.

Each family has a precise scalar path (adaptive quadrature, used by the
public operations) and a batched path that evaluates thousands of draws at
once from shared product tables (used by simulation-heavy internals).  In
the batched path all three integrands reduce, after the substitutions
t = xi*a resp. t = xi*a/w and u = log t, to

    phi(u) = c*u - (m/xi)*log(1+e^u) - (1+1/xi)*g(e^u) [+ target terms]

with g(t) = sum_i log(1+t*x*_i) the only draw-specific ingredient, which is
exactly what :class:`~tailcens._quad.TailProductTable` tabulates.
"""

from __future__ import annotations

import math

import numpy as np

from .._quad import TailProductTable, batched_log_integral, log_integral_precise
from ..errors import DomainError, ValidationError
from .core import SelfNormalized

__all__ = [
    "density_fxstar",
    "log_density_fxstar",
    "kappa_density",
    "log_kappa_density",
    "joint_density_ystar_xstar",
    "log_joint_density_ystar_xstar",
    "table_for",
    "log_fxstar_table",
    "log_kappaf_table",
    "log_joint_table",
]


def _check_xi(xi: float) -> float:
    xi = float(xi)
    if not (0.0 < xi <= 1.0):
        raise DomainError("the fixed-k procedures require xi in (0, 1]")
    return xi


def _interior(xstar: SelfNormalized) -> np.ndarray:
    if not isinstance(xstar, SelfNormalized):
        raise ValidationError("expected a SelfNormalized block")
    return xstar.values


# ---------------------------------------------------------------------------
# Precise (adaptive-quadrature) path
# ---------------------------------------------------------------------------


def log_density_fxstar(xstar: SelfNormalized, xi: float, rel_tol: float = 1e-9) -> float:
    """log f_{X*|xi}(x*) via adaptive quadrature."""
    xi = _check_xi(xi)
    x = _interior(xstar)
    k, m = xstar.k, xstar.m

    def log_f(t):
        with np.errstate(divide="ignore"):
            lt = np.log(t)
        g = np.log1p(t[:, None] * x[None, :]).sum(axis=1)
        return (k - 2) * lt - (m / xi) * np.log1p(t) - (1.0 + 1.0 / xi) * g

    li = log_integral_precise(log_f, rel_tol=rel_tol)
    return math.lgamma(k + m) - math.lgamma(m + 1) - (k - 1) * math.log(xi) + li


def density_fxstar(xstar: SelfNormalized, xi: float) -> float:
    """Density of the maximal invariant X* under tail index ``xi``."""
    return math.exp(log_density_fxstar(xstar, xi))


def log_kappa_density(xstar: SelfNormalized, xi: float, rel_tol: float = 1e-9) -> float:
    """log of the expected-spread-weighted density kappa_xi(x*) f_{X*|xi}(x*)."""
    xi = _check_xi(xi)
    x = _interior(xstar)
    k, m = xstar.k, xstar.m

    def log_f(t):
        with np.errstate(divide="ignore"):
            lt = np.log(t)
        g = np.log1p(t[:, None] * x[None, :]).sum(axis=1)
        return (k - 1) * lt - (m / xi) * np.log1p(t) - (1.0 + 1.0 / xi) * g

    li = log_integral_precise(log_f, rel_tol=rel_tol)
    return math.lgamma(k + m - xi) - math.lgamma(m + 1) - k * math.log(xi) + li


def kappa_density(xstar: SelfNormalized, xi: float) -> float:
    """Expected-spread-weighted density at x* (length-cost kernel)."""
    return math.exp(log_kappa_density(xstar, xi))


def log_joint_density_ystar_xstar(
    y: float, xstar: SelfNormalized, xi: float, h: float, rel_tol: float = 1e-9
) -> float:
    """log f_{Y*(xi), X* | xi}(y, x*) via adaptive quadrature.

    ``h`` is the exceedance parameter of the target quantile (h = p*n in the
    sampling picture); integrates over the scale coordinate ``a`` with the
    substitution left explicit, as an independent check on the batched path.
    """
    xi = _check_xi(xi)
    if not h > 0:
        raise DomainError("exceedance parameter h must be positive")
    x = _interior(xstar)
    k, m = xstar.k, xstar.m
    cap_h = h ** (-xi)
    y = float(y)

    def log_f(a):
        w = cap_h - xi * a * y
        ok = w > 0
        w = np.where(ok, w, 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            la = np.log(a)
            out = (
                (k - 1) * la
                - (m / xi) * np.log(w + xi * a)
                - w ** (-1.0 / xi)
                - (1.0 + 1.0 / xi) * np.log(w[:, None] + xi * a[:, None] * x[None, :]).sum(axis=1)
            )
        return np.where(ok, out, -np.inf)

    upper = cap_h / (xi * y) if y > 0 else math.inf
    li = log_integral_precise(log_f, upper=upper, rel_tol=rel_tol)
    return -math.lgamma(m + 1) + li


def joint_density_ystar_xstar(y: float, xstar: SelfNormalized, xi: float, h: float) -> float:
    """Joint density of the self-normalized quantile position and X*."""
    lf = log_joint_density_ystar_xstar(y, xstar, xi, h)
    return math.exp(lf) if lf > -math.inf else 0.0


# ---------------------------------------------------------------------------
# Batched path (shared product tables, many draws at once)
# ---------------------------------------------------------------------------


def table_for(draws: np.ndarray) -> TailProductTable:
    """Build the shared log-product table for a block of self-normalized draws.

    ``draws`` has shape (n, k), each row weakly decreasing from 1 to 0.
    """
    return TailProductTable(np.asarray(draws, dtype=float))


def _as_col(xi, n: int):
    """xi as a scalar or an (n, 1) column for per-row broadcasting."""
    x = np.asarray(xi, dtype=float)
    if x.ndim == 0:
        _check_xi(float(x))
        return float(x)
    if x.shape != (n,):
        raise ValidationError("per-row xi must have one entry per draw")
    if np.any((x <= 0) | (x > 1.0)):
        raise DomainError("the fixed-k procedures require xi in (0, 1]")
    return x[:, None]


def log_fxstar_table(tab: TailProductTable, xi, m: int) -> np.ndarray:
    """log f_{X*|xi} for every row of the table; xi scalar or per-row."""
    n, k = tab.n_draws, tab.k
    xi_c = _as_col(xi, n)

    def phi(u):
        return (k - 1) * u - (m / xi_c) * np.logaddexp(0.0, u) - (1.0 + 1.0 / xi_c) * tab.eval(u)

    li = batched_log_integral(phi, n)
    lx = np.log(xi_c).ravel() if np.ndim(xi_c) else math.log(xi_c)
    return math.lgamma(k + m) - math.lgamma(m + 1) - (k - 1) * lx + li


def log_kappaf_table(tab: TailProductTable, xi, m: int) -> np.ndarray:
    """log kappa_xi * f_{X*|xi} for every row; xi scalar or per-row."""
    n, k = tab.n_draws, tab.k
    xi_c = _as_col(xi, n)

    def phi(u):
        return k * u - (m / xi_c) * np.logaddexp(0.0, u) - (1.0 + 1.0 / xi_c) * tab.eval(u)

    li = batched_log_integral(phi, n)
    if np.ndim(xi_c):
        xv = xi_c.ravel()
        lg = np.array([math.lgamma(k + m - x) for x in xv])
        return lg - math.lgamma(m + 1) - k * np.log(xv) + li
    return math.lgamma(k + m - xi_c) - math.lgamma(m + 1) - k * math.log(xi_c) + li


def log_joint_table(tab: TailProductTable, xi, m: int, h: float, y) -> np.ndarray:
    """log f_{Y*(xi), X*|xi}(y_row, x*_row) for every row.

    ``y`` is scalar or per-row; after the substitution t = xi*a/w the target
    terms depend on the row only through (1 + t*y), so one table serves any
    number of target positions.
    """
    if not h > 0:
        raise DomainError("exceedance parameter h must be positive")
    n, k = tab.n_draws, tab.k
    xi_c = _as_col(xi, n)
    y_arr = np.asarray(y, dtype=float)
    y_c = y_arr[:, None] if y_arr.ndim == 1 else float(y_arr)
    if y_arr.ndim == 1 and y_arr.shape != (n,):
        raise ValidationError("per-row y must have one entry per draw")

    def phi(u):
        ty = np.exp(u) * y_c
        with np.errstate(divide="ignore", invalid="ignore"):
            lp = np.where(ty > -1.0, np.log1p(np.maximum(ty, -1.0)), -np.inf)
        base = k * u - (m / xi_c) * np.logaddexp(0.0, u) - (1.0 + 1.0 / xi_c) * tab.eval(u)
        return base + ((k + m) / xi_c - 1.0) * lp - h * np.exp(lp / xi_c)

    # for y < 0 the substitution runs out of domain at t = 1/|y|
    if y_arr.ndim == 1:
        with np.errstate(divide="ignore"):
            cap = np.where(y_arr < 0, -np.log(np.abs(y_arr)) - 1e-12, np.inf)
    else:
        cap = (-math.log(abs(y_c)) - 1e-12) if y_c < 0 else None
    li = batched_log_integral(phi, n, u_hi_cap=cap)
    lx = np.log(xi_c).ravel() if np.ndim(xi_c) else math.log(xi_c)
    return -math.lgamma(m + 1) + (k + m) * math.log(h) - k * lx + li
