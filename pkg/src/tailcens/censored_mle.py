"""Censored-GPD maximum likelihood: fitting, information, quantile intervals.

The tail model: conditionally on exceeding the cutoff ``u``, observations
follow a GPD with shape ``xi`` and scale ``sigma``; everything above the
censoring threshold ``T`` is censored (only the count ``m`` is known).
The conditional log-likelihood of a censored tail sample is

    L(xi, sigma) = -sum_i [ D_i/xi * log(1 + xi*(T-u)/sigma)
                            + (1-D_i)*(1+1/xi) * log(1 + xi*e_i/sigma)
                            + (1-D_i)*log(sigma) ]

with ``D_i`` the censoring indicator and ``e_i`` the observed exceedances.
This module maximizes it, evaluates the information matrix of the limit
experiment in closed form, and builds normal-approximation confidence
intervals for the tail index and for extreme quantiles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, stats

from .data import ConfidenceInterval, TailData
from .distributions import XI_EPS, GpdParams
from .errors import DomainError, SolverError, ValidationError

__all__ = [
    "GpdFit",
    "neg_loglik",
    "neg_loglik_grad",
    "neg_loglik_hess",
    "fit_mle",
    "fisher_info",
    "ci_index_ml",
    "quantile_point",
    "ci_quantile_ml",
]

_INF_SENTINEL = math.inf
MIN_K_FOR_MLE = 5

# Fits that run into the light-tail boundary (xi -> 0) still need a finite
# information matrix; the index is floored here for that evaluation only,
# which keeps the censoring ratio log(kappa)/xi stable.
_XI_INFO_FLOOR = 1e-4


@dataclass(frozen=True)
class GpdFit:
    """Result of the censored-GPD fit.

    ``info`` is the scale-free information matrix for (xi, sigma/sigma0 - 1)
    evaluated at the plug-ins (xi_hat, kappa_hat); ``kappa_hat`` is the
    plug-in censoring severity ``1 + xi_hat*(T-u)/sigma_hat`` (infinite when
    the sample carries no censored observations).
    """

    params: GpdParams
    loglik: float
    info: np.ndarray
    converged: bool
    kappa_hat: float


def _censoring_gap(data: TailData) -> float | None:
    """T - u when the censoring threshold is known, else None."""
    if data.T is None:
        return None
    return data.T - data.u


def _require_threshold(data: TailData):
    if data.m > 0 and data.T is None:
        raise ValidationError(
            "censoring threshold T is required when censored observations are present"
        )


def neg_loglik(params: GpdParams, data: TailData) -> float:
    """Negative conditional log-likelihood of the censored tail sample.

    Returns +inf (a sentinel optimizers reject) when the parameters are
    outside the admissible region -- i.e. when some observation or the
    censoring gap falls outside the implied GPD support.  Malformed data
    raise instead of returning the sentinel.
    """
    _require_threshold(data)
    xi, sigma = params.xi, params.sigma
    e = data.exceedances
    t_u = _censoring_gap(data)

    if abs(xi) < XI_EPS:
        obs = float(np.sum(e / sigma + math.log(sigma)))
        cen = 0.0 if data.m == 0 else data.m * (t_u / sigma)
        return obs + cen

    w = 1.0 + xi * e / sigma
    if np.any(w <= 0):
        return _INF_SENTINEL
    obs = float(np.sum((1.0 + 1.0 / xi) * np.log(w) + math.log(sigma)))
    cen = 0.0
    if data.m > 0:
        z = 1.0 + xi * t_u / sigma
        if z <= 0:
            return _INF_SENTINEL
        cen = data.m * math.log(z) / xi
    return obs + cen


def neg_loglik_grad(params: GpdParams, data: TailData) -> np.ndarray:
    """Analytic gradient of :func:`neg_loglik` with respect to (xi, sigma)."""
    _require_threshold(data)
    xi, sigma = params.xi, params.sigma
    e = data.exceedances
    w = 1.0 + xi * e / sigma
    if np.any(w <= 0):
        raise DomainError("parameters outside the admissible region")
    iw = 1.0 / w
    lw = np.log(w)
    g_xi = float(np.sum(-lw / xi**2 + (1.0 + 1.0 / xi) * (1.0 - iw) / xi))
    g_sigma = float(np.sum(-1.0 / (xi * sigma) + (1.0 + 1.0 / xi) * iw / sigma))
    if data.m > 0:
        t_u = _censoring_gap(data)
        z = 1.0 + xi * t_u / sigma
        if z <= 0:
            raise DomainError("parameters outside the admissible region")
        g_xi += data.m * (-math.log(z) / xi**2 + (1.0 - 1.0 / z) / xi**2)
        g_sigma += data.m * (-(1.0 - 1.0 / z) / (xi * sigma))
    return np.array([g_xi, g_sigma])


def neg_loglik_hess(params: GpdParams, data: TailData) -> np.ndarray:
    """Analytic Hessian of :func:`neg_loglik` with respect to (xi, sigma)."""
    _require_threshold(data)
    xi, sigma = params.xi, params.sigma
    e = data.exceedances
    w = 1.0 + xi * e / sigma
    if np.any(w <= 0):
        raise DomainError("parameters outside the admissible region")
    iw = 1.0 / w
    iw2 = iw * iw
    lw = np.log(w)

    h_xx = float(
        np.sum(
            2.0 * lw / xi**3
            - (3.0 + xi) / xi**3
            + 2.0 * (2.0 + xi) / xi**3 * iw
            - (1.0 + xi) / xi**3 * iw2
        )
    )
    h_ss = float(np.sum(1.0 / (xi * sigma**2) - (1.0 + 1.0 / xi) * iw2 / sigma**2))
    h_xs = float(
        np.sum((1.0 - (2.0 + xi) * iw + (1.0 + xi) * iw2) / (sigma * xi**2))
    )
    if data.m > 0:
        t_u = _censoring_gap(data)
        z = 1.0 + xi * t_u / sigma
        iz = 1.0 / z
        h_xx += data.m * (
            2.0 * math.log(z) / xi**3
            - (t_u**2 / (sigma**2 * xi)) * iz**2
            - (2.0 * t_u / (sigma * xi**2)) * iz
        )
        h_ss += data.m * (1.0 - iz**2) / (sigma**2 * xi)
        h_xs += data.m * (1.0 - 2.0 * iz + iz**2) / (sigma * xi**2)
    return np.array([[h_xx, h_xs], [h_xs, h_ss]])


def fisher_info(xi: float, kappa: float) -> np.ndarray:
    """Per-tail-observation information matrix of the censored GPD model.

    ``kappa`` is the censoring severity ``1 + xi*(T-u)/sigma`` of the limit
    experiment; ``kappa = inf`` means asymptotically negligible censoring.
    The matrix is for the parameters (xi, sigma/sigma0 - 1) and is exact for
    every ``xi > 0``, ``kappa > 1``.
    """
    if xi <= 0:
        raise DomainError("fisher_info requires xi > 0")
    if not kappa > 1.0:
        raise DomainError("fisher_info requires kappa > 1 (kappa = inf allowed)")
    a = (1.0 + xi) * (1.0 + 2.0 * xi)
    if math.isinf(kappa):
        q1 = q2 = q3 = 0.0
    else:
        lk = math.log(kappa)
        q1 = math.exp(-(2.0 + 1.0 / xi) * lk)
        q2 = math.exp(-(1.0 + 1.0 / xi) * lk)
        q3 = math.exp(-(1.0 / xi) * lk)
    m11 = 2.0 / a + (-(1.0 + xi) * q1 + (2.0 + 4.0 * xi) * q2 - a * q3) / (a * xi**2)
    m22 = (1.0 - q1) / (1.0 + 2.0 * xi)
    # the kappa-linear part of the bracket folds into q2 = kappa*q1
    m12 = 1.0 / a + (
        (-((1.0 + xi) ** 2) + a) * q1 + (-2.0 * a + (2.0 + xi) * (1.0 + 2.0 * xi)) * q2
    ) / (a * xi**2)
    return np.array([[m11, m12], [m12, m22]])


# ---------------------------------------------------------------------------
# Fitting
# ---------------------------------------------------------------------------

# deterministic multiplicative jitters for the simplex restarts
_RESTART_JITTER = [
    (0.0, 0.0),
    (0.6, -0.4),
    (-0.7, 0.5),
    (1.1, 0.3),
    (-1.0, -0.8),
]


def _objective_log(theta: np.ndarray, data: TailData) -> float:
    xi, sigma = math.exp(theta[0]), math.exp(theta[1])
    if not (math.isfinite(xi) and math.isfinite(sigma)) or xi > 1e6 or sigma > 1e12:
        return _INF_SENTINEL
    return neg_loglik(GpdParams(xi, sigma), data)


def _grad_hess_log(theta: np.ndarray, data: TailData):
    """Gradient and Hessian of the objective in (log xi, log sigma)."""
    x = np.exp(theta)
    p = GpdParams(x[0], x[1])
    g = neg_loglik_grad(p, data)
    h = neg_loglik_hess(p, data)
    g_log = g * x
    h_log = h * np.outer(x, x) + np.diag(g * x)
    return g_log, h_log


def fit_mle(
    data: TailData,
    restarts: int = 5,
    max_simplex_iter: int = 500,
    grad_tol: float = 1e-8,
) -> GpdFit:
    """Maximize the censored-GPD likelihood over (0, inf)^2.

    Runs a derivative-free simplex search in (log xi, log sigma) from
    ``restarts`` jittered starting points, then polishes the best point with
    Newton steps using the analytic gradient and Hessian.  ``converged`` is
    true iff the final log-space gradient sup-norm is below ``grad_tol``.
    """
    _require_threshold(data)
    if data.k < MIN_K_FOR_MLE:
        raise ValidationError(f"maximum likelihood fitting needs k >= {MIN_K_FOR_MLE}")

    e = data.exceedances
    if np.all(e <= 0):
        # all exceedances at the cutoff: likelihood unbounded in sigma -> 0
        p = GpdParams(0.3, max(float(np.mean(e)), 1e-12) + 1e-12)
        return GpdFit(p, -neg_loglik(p, data), fisher_info(p.xi, math.inf), False, math.inf)

    pos = e[e > 0]
    sigma0 = max(float(np.median(pos)) / math.log(2.0), 1e-12)
    xi0 = 0.3
    best_theta, best_val = None, math.inf
    for j in range(max(1, restarts)):
        dx, ds = _RESTART_JITTER[j % len(_RESTART_JITTER)]
        start = np.array([math.log(xi0) + dx, math.log(sigma0) + ds])
        res = optimize.minimize(
            _objective_log,
            start,
            args=(data,),
            method="Nelder-Mead",
            options={"maxiter": max_simplex_iter, "xatol": 1e-10, "fatol": 1e-12},
        )
        if res.fun < best_val:
            best_val, best_theta = res.fun, res.x

    # Newton polish with backtracking on the analytic derivatives
    theta = np.asarray(best_theta, dtype=float)
    val = best_val
    for _ in range(60):
        try:
            g, h = _grad_hess_log(theta, data)
        except DomainError:
            break
        if np.max(np.abs(g)) < grad_tol:
            break
        ridge = 0.0
        for _ in range(8):
            try:
                step = np.linalg.solve(h + ridge * np.eye(2), -g)
                break
            except np.linalg.LinAlgError:
                ridge = max(2.0 * ridge, 1e-8)
        else:
            break
        scale = 1.0
        improved = False
        for _ in range(30):
            cand = theta + scale * step
            cand_val = _objective_log(cand, data)
            if cand_val < val:
                theta, val, improved = cand, cand_val, True
                break
            scale *= 0.5
        if not improved:
            # near the optimum the objective change falls below float
            # rounding; accept the full step if it shrinks the gradient
            cand = theta + step
            try:
                g_cand, _ = _grad_hess_log(cand, data)
            except DomainError:
                break
            if np.max(np.abs(g_cand)) < np.max(np.abs(g)):
                theta, val = cand, _objective_log(cand, data)
            else:
                break

    if math.exp(theta[0]) <= 5.0 * XI_EPS:
        # Light-tail boundary: the limit model is exponential, whose profile
        # scale optimum is closed-form, and the full-model derivative
        # formulas cancel catastrophically this close to zero.  Snap to the
        # exponential optimum and check the index direction by a stable
        # likelihood difference.
        t_u = 0.0 if data.m == 0 else _censoring_gap(data)
        sigma_star = max((float(np.sum(e)) + data.m * t_u) / data.k, 1e-300)
        cand = np.array([math.log(0.5 * XI_EPS), math.log(sigma_star)])
        cand_val = _objective_log(cand, data)
        if cand_val <= val + 1e-9:
            theta, val = cand, cand_val
        probe = _objective_log(np.array([math.log(1e-4), theta[1]]), data)
        converged = bool(probe - val >= -1e-6)
    else:
        try:
            g, _ = _grad_hess_log(theta, data)
            converged = bool(np.max(np.abs(g)) < grad_tol)
        except DomainError:
            converged = False

    xi_hat, sigma_hat = math.exp(theta[0]), math.exp(theta[1])
    params = GpdParams(xi_hat, sigma_hat)
    t_u = _censoring_gap(data)
    kappa_hat = math.inf if data.m == 0 else 1.0 + xi_hat * t_u / sigma_hat
    xi_info = max(xi_hat, _XI_INFO_FLOOR)
    kappa_info = math.inf if data.m == 0 else 1.0 + xi_info * t_u / sigma_hat
    info = fisher_info(xi_info, kappa_info)
    return GpdFit(params, -val, info, converged, kappa_hat)


# ---------------------------------------------------------------------------
# Intervals
# ---------------------------------------------------------------------------


def _z_value(level: float) -> float:
    return float(stats.norm.ppf(1.0 - (1.0 - level) / 2.0))


def ci_index_ml(fit: GpdFit, k: int, level: float = 0.95) -> ConfidenceInterval:
    """Normal-approximation interval for the tail index, truncated at 0."""
    if not fit.converged:
        raise ValidationError("ci_index_ml requires a converged fit")
    try:
        minv = np.linalg.inv(fit.info)
    except np.linalg.LinAlgError as exc:
        raise SolverError("information matrix is singular") from exc
    hw = _z_value(level) * math.sqrt(max(minv[0, 0], 0.0) / k)
    xi_hat = fit.params.xi
    return ConfidenceInterval(max(0.0, xi_hat - hw), xi_hat + hw, level, "ml")


def _d_n(data: TailData, p: float) -> float:
    return (data.m + data.k) / (p * data.n)


def quantile_point(fit: GpdFit, data: TailData, p: float) -> float:
    """Point estimate of the upper quantile Q(1-p) implied by the fit.

    Requires the target to be at least as extreme as the tail cutoff
    (p*n <= m+k); refuses otherwise, since interior quantiles are better
    served by empirical quantiles.
    """
    if not (0.0 < p < 1.0):
        raise DomainError("tail probability p must lie in (0, 1)")
    d_n = _d_n(data, p)
    if d_n < 1.0:
        raise DomainError(
            "target quantile is interior to the observed tail (p*n > m+k); "
            "use empirical quantiles instead"
        )
    xi, sigma = fit.params.xi, fit.params.sigma
    if abs(xi) < XI_EPS:
        return data.u + sigma * math.log(d_n)
    return data.u + (sigma / xi) * (d_n**xi - 1.0)


def _q_factor(xi: float, t: float) -> float:
    """q_xi(t) = t^xi * log(t) / xi, the quantile sensitivity factor."""
    if abs(xi) < XI_EPS:
        return math.log(t) if t > 0 else 0.0
    return (t**xi) * math.log(t) / xi


def ci_quantile_ml(
    fit: GpdFit, data: TailData, p: float, level: float = 0.95
) -> ConfidenceInterval:
    """Normal-approximation interval for Q(1-p), truncated below at u."""
    if not fit.converged:
        raise ValidationError("ci_quantile_ml requires a converged fit")
    q_hat = quantile_point(fit, data, p)
    d_n = _d_n(data, p)
    xi, sigma = fit.params.xi, fit.params.sigma
    qf = _q_factor(xi, d_n)
    if qf == 0.0:
        return ConfidenceInterval(
            q_hat, q_hat, level, "ml", note="degenerate: target at the tail cutoff (d_n = 1)"
        )
    minv = np.linalg.inv(fit.info)
    v = np.array([1.0, (d_n**xi - 1.0) / (xi * qf)])
    sigma_sq = float(v @ minv @ v) + qf**-2
    hw = _z_value(level) * sigma * abs(qf) * math.sqrt(sigma_sq / data.k)
    return ConfidenceInterval(max(data.u, q_hat - hw), q_hat + hw, level, "ml")
