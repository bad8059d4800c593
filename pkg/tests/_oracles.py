"""Independent oracles shared by the unit tests and the acceptance suite.

Everything here is re-derived from first principles -- symbolic
differentiation of the censored tail log-likelihood, exact order-statistic
constructions -- and deliberately avoids the package's own closed forms, so
agreement is evidence rather than tautology.
"""

from __future__ import annotations

import math

import numpy as np
import sympy as sp
from scipy import integrate

__all__ = [
    "expected_info_quadrature",
    "score_mean_quadrature",
    "score_outer_mc",
    "pareto_top_order_stats",
]

# ---------------------------------------------------------------------------
# Symbolic derivatives of the censored tail log-likelihood
#
# One tail observation, scale-free parameterization (xi, s) with
# s = sigma/sigma0 - 1 and sigma0 = 1:
#   uncensored y:  l = -log(1+s) - (1 + 1/xi) log(1 + xi y/(1+s))
#   censored:      l = -(1/xi) log(1 + xi c/(1+s)),  c = censoring gap
# ---------------------------------------------------------------------------

_xi = sp.Symbol("xi", positive=True)
_s = sp.Symbol("s", real=True)
_y = sp.Symbol("y", positive=True)
_c = sp.Symbol("c", positive=True)

_L_UNC = -sp.log(1 + _s) - (1 + 1 / _xi) * sp.log(1 + _xi * _y / (1 + _s))
_L_CEN = -(1 / _xi) * sp.log(1 + _xi * _c / (1 + _s))

_PARAMS = (_xi, _s)


def _lambdify_at_s0(expr, free):
    return sp.lambdify(free, sp.simplify(expr.subs(_s, 0)), "numpy")


_SCORE_UNC = [_lambdify_at_s0(sp.diff(_L_UNC, a), (_xi, _y)) for a in _PARAMS]
_SCORE_CEN = [_lambdify_at_s0(sp.diff(_L_CEN, a), (_xi, _c)) for a in _PARAMS]
_HESS_UNC = [
    [_lambdify_at_s0(sp.diff(_L_UNC, a, b), (_xi, _y)) for b in _PARAMS]
    for a in _PARAMS
]
_HESS_CEN = [
    [_lambdify_at_s0(sp.diff(_L_CEN, a, b), (_xi, _c)) for b in _PARAMS]
    for a in _PARAMS
]


def _gpd_pdf(y, xi):
    return (1.0 + xi * y) ** (-1.0 - 1.0 / xi)


def _tail_quad(fn, xi, upper):
    val, err = integrate.quad(
        lambda y: fn(y) * _gpd_pdf(y, xi),
        0.0,
        upper,
        epsabs=1e-13,
        epsrel=1e-12,
        limit=400,
    )
    return val


def expected_info_quadrature(xi: float, kappa: float) -> np.ndarray:
    """E[-Hessian] of the censored tail log-likelihood by quadrature."""
    upper = math.inf if math.isinf(kappa) else (kappa - 1.0) / xi
    out = np.empty((2, 2))
    for i in range(2):
        for j in range(2):
            val = _tail_quad(lambda y: -_HESS_UNC[i][j](xi, y), xi, upper)
            if not math.isinf(kappa):
                val += kappa ** (-1.0 / xi) * (-_HESS_CEN[i][j](xi, upper))
            out[i, j] = val
    return out


def score_mean_quadrature(xi: float, kappa: float) -> np.ndarray:
    """E[score] of the censored tail log-likelihood by quadrature."""
    upper = math.inf if math.isinf(kappa) else (kappa - 1.0) / xi
    out = np.empty(2)
    for i in range(2):
        val = _tail_quad(lambda y: _SCORE_UNC[i](xi, y), xi, upper)
        if not math.isinf(kappa):
            val += kappa ** (-1.0 / xi) * _SCORE_CEN[i](xi, upper)
        out[i] = val
    return out


def score_outer_mc(xi: float, kappa: float, n_draws: int, seed: int):
    """Monte Carlo E[score score^T] with entrywise standard errors.

    Draws from the exact censored GPD: y ~ GPD(xi, 1), values at or above
    the censoring gap c contribute only the censoring-probability score.
    Returns (mean, se) as 2x2 arrays.
    """
    rng = np.random.default_rng(seed)
    u = rng.random(n_draws)
    y = np.expm1(-xi * np.log1p(-u)) / xi
    if math.isinf(kappa):
        cen = np.zeros(n_draws, dtype=bool)
    else:
        c = (kappa - 1.0) / xi
        cen = y >= c
    scores = np.empty((n_draws, 2))
    for i in range(2):
        col = np.empty(n_draws)
        col[~cen] = _SCORE_UNC[i](xi, y[~cen])
        if np.any(cen):
            col[cen] = _SCORE_CEN[i](xi, c)
        scores[:, i] = col
    prods = np.einsum("ni,nj->nij", scores, scores)
    mean = prods.mean(axis=0)
    se = prods.std(axis=0, ddof=1) / math.sqrt(n_draws)
    return mean, se


def pareto_top_order_stats(n: int, j_max: int, reps: int, seed: int) -> np.ndarray:
    """Normalized top order statistics of a Pareto(2) sample of size n.

    Uses the exact distributional identity for uniform order statistics:
    with Gamma variables G_j = E_1 + ... + E_j and G_{n+1} ~ Gamma(n+1),
    U_(j) = G_j / G_{n+1} exactly, so the j-th largest Pareto(2) value is
    X_(j) = U_(j)^{-1/2}.  Returns (reps, j_max) of the EV-normalized
    values (X_(j) - b_n)/a_n with b_n = sqrt(n), a_n = sqrt(n)/2 -- the
    norming for which the limit has tail index 1/2 -- without simulating
    the full sample.
    """
    rng = np.random.default_rng(seed)
    spacings = rng.standard_exponential((reps, j_max))
    g_top = np.cumsum(spacings, axis=1)
    g_rest = rng.gamma(shape=n + 1 - j_max, scale=1.0, size=(reps, 1))
    g_total = g_rest + g_top[:, -1:]
    u_j = g_top / g_total
    x_j = u_j ** -0.5
    b_n = math.sqrt(n)
    a_n = 0.5 * math.sqrt(n)
    return (x_j - b_n) / a_n
