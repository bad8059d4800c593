"""Coverage-calibrated Lagrange weights for length-optimal quantile sets.

The level-``1-alpha`` quantile set evaluated at the maximal invariant x* is

    S(x*) = { y : sum_g W_g kappafa_g(x*)  <  sum_g Lambda_g f_g(y, x*) },

where kappafa_g is the expected-spread-weighted density (the length-cost
kernel) and f_g the joint density of the self-normalized quantile position
and x* under xi_g.  The point masses Lambda are the Lagrange multipliers of
the minimum-expected-length program: they must be set so that the coverage
P_xi( Y*(xi) in S(X*) ) equals the nominal level at every xi on the grid.

This module finds Lambda by stochastic fixed-point iteration: simulate
blocks under each grid xi once, precompute the exponentiated density
matrices, then iterate multiplicative updates

    log Lambda_i  <-  log Lambda_i + eta * (level - coverage_i(Lambda))

until the simulated coverage profile is flat at the level within tolerance.
Each iteration is a 50-dimensional matrix-vector product per grid point, so
iterations are practically free once the densities are tabulated; the cost
is the one-time density precomputation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .._rng import STREAM_LAMBDA, STREAM_LAMBDA_VERIFY, substream
from ..errors import SolverError, ValidationError
from . import cache as _cache
from .config import FkConfig
from .core import simulate_tail_ev
from .densities import log_joint_table, log_kappaf_table, table_for

__all__ = ["WeightTable", "solve_lambda", "solve_lambda_many", "verify_coverage", "q_ev"]

_CHUNK = 4000
_FLOOR_DROP = 30.0  # log-units below the initial mass at which a point counts as floored


def q_ev(xi: float, h: float) -> float:
    """Self-normalized-scale position of the extreme quantile: (h^-xi - 1)/xi."""
    if not h > 0:
        raise ValidationError("exceedance parameter h must be positive")
    return float(np.expm1(-xi * math.log(h)) / xi)


@dataclass(frozen=True)
class WeightTable:
    """Calibrated Lagrange point masses for one (k, m, h, level) problem."""

    k: int
    m: int
    h: float
    level: float
    xi_grid: np.ndarray
    masses: np.ndarray
    certificate: dict

    def to_payload(self, cfg: FkConfig, draws: int) -> dict:
        payload = _cache.new_payload("lambda", self.k, self.m, self.h, cfg, draws)
        payload["masses"] = [float(v) for v in self.masses]
        payload["certificate"] = self.certificate
        return payload

    @classmethod
    def from_payload(cls, payload: dict) -> "WeightTable":
        return cls(
            k=int(payload["k"]),
            m=int(payload["m"]),
            h=float(payload["h"]),
            level=float(payload["level"]),
            xi_grid=np.asarray(payload["xi_grid"], dtype=float),
            masses=np.asarray(payload["masses"], dtype=float),
            certificate=payload.get("certificate") or {},
        )


def _assemble_blocks(k: int, m: int, hs, cfg: FkConfig, n: int, stream_tag: int):
    """Simulate per-grid-point blocks and precompute all densities.

    Returns (lhs, targets): ``lhs[i]`` is the (n,) log length-cost value per
    draw of grid point i; ``targets[h][i]`` is a pair (M, E) with
    ``M + log(Lambda @ E)`` the coverage threshold, M the per-draw max-shift
    and E the exponentiated (g, n) joint-density matrix in float32.
    """
    grid = cfg.xi_grid
    logw = np.log(cfg.w)
    lhs: list[np.ndarray] = []
    targets = {h: [] for h in hs}
    for i, xi_i in enumerate(grid):
        rng = substream(cfg.seed, stream_tag, k, m, i)
        lhs_parts = []
        parts = {h: ([], []) for h in hs}
        done = 0
        while done < n:
            nb = min(n - done, _CHUNK)
            x = simulate_tail_ev(float(xi_i), m, k, rng, size=nb)
            spread = x[:, 0] - x[:, -1]
            xst = (x - x[:, -1:]) / spread[:, None]
            tab = table_for(xst)
            logkf = np.stack([log_kappaf_table(tab, xg, m) for xg in grid], axis=1)
            lhs_parts.append(logsumexp(logkf + logw[None, :], axis=1))
            for h in hs:
                y = (q_ev(float(xi_i), h) - x[:, -1]) / spread
                logr = np.stack([log_joint_table(tab, xg, m, h, y) for xg in grid], axis=0)
                mj = np.max(logr, axis=0)
                parts[h][0].append(mj)
                parts[h][1].append(np.exp(logr - mj[None, :]).astype(np.float32))
            done += nb
        lhs.append(np.concatenate(lhs_parts))
        for h in hs:
            targets[h].append(
                (np.concatenate(parts[h][0]), np.concatenate(parts[h][1], axis=1))
            )
    return lhs, targets


def _coverage_profile(loglam: np.ndarray, lhs, blocks) -> np.ndarray:
    s = float(np.max(loglam))
    lam = np.exp(loglam - s)
    cov = np.empty(len(lhs))
    for i, (mj, e) in enumerate(blocks):
        rhs = mj + s + np.log(np.maximum(lam @ e, 1e-300))
        cov[i] = np.mean(lhs[i] < rhs)
    return cov


def _fit_masses(lhs, blocks, cfg: FkConfig, n: int, max_iter: int):
    """Fixed-point iteration on the log-masses; returns (masses, certificate)."""
    grid = cfg.xi_grid
    level = cfg.level
    se = math.sqrt(level * (1.0 - level) / n)
    tol = max(cfg.coverage_tol, 1.2 * se)
    logw = np.log(cfg.w)

    # scalar initialization: mean coverage is monotone in the common factor c
    def mean_cov(logc: float) -> float:
        return float(np.mean(_coverage_profile(logc + logw, lhs, blocks)))

    lo, hi = -40.0, 40.0
    while mean_cov(hi) < level and hi < 300.0:
        hi += 40.0
    while mean_cov(lo) > level and lo > -300.0:
        lo -= 40.0
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        if mean_cov(mid) < level:
            lo = mid
        else:
            hi = mid
    loglam = 0.5 * (lo + hi) + logw
    floor_ref = loglam.copy()

    # Sign-based updates with per-point adaptive step sizes: each mass moves
    # up/down by its own step depending on whether coverage at its grid point
    # is below/above the level; the step grows geometrically while the sign
    # persists and halves on a flip.  Masses that collapse while coverage
    # stays above the level are at-most-binding constraints: they are pinned
    # at a hard floor and excluded from the stopping rule (they re-enter as
    # soon as their coverage dips below the level).
    delta = np.full(len(grid), 0.3)
    prev_sign = np.zeros(len(grid))
    hard_floor = floor_ref - _FLOOR_DROP - 10.0
    cov = _coverage_profile(loglam, lhs, blocks)
    for it in range(1, max_iter + 1):
        floored = (loglam < floor_ref - _FLOOR_DROP) & (cov > level)
        dev_vec = np.where(floored, 0.0, cov - level)
        dev = float(np.max(np.abs(dev_vec)))
        if dev <= tol:
            certificate = {
                "coverage": [float(c) for c in cov],
                "max_abs_dev": float(np.max(np.abs(cov - level))),
                "binding_dev": dev,
                "tol": tol,
                "mc_std_err": se,
                "iterations": it - 1,
                "draws_per_point": n,
                "floored": [int(j) for j in np.nonzero(floored)[0]],
            }
            return np.exp(loglam), certificate
        sign = np.sign(level - cov)
        turn = sign * prev_sign
        delta = np.where(
            turn > 0,
            np.minimum(delta * 1.3, 8.0),
            np.where(turn < 0, np.maximum(delta * 0.5, 0.002), delta),
        )
        loglam = np.maximum(loglam + sign * delta, hard_floor)
        prev_sign = sign
        cov = _coverage_profile(loglam, lhs, blocks)

    raise SolverError(
        "coverage calibration did not converge",
        diagnostics={
            "coverage": [float(c) for c in cov],
            "max_abs_dev": float(np.max(np.abs(cov - level))),
            "tol": tol,
            "iterations": max_iter,
            "draws_per_point": n,
        },
    )


def solve_lambda_many(
    k: int,
    m: int,
    hs,
    cfg: FkConfig | None = None,
    draws_per_point: int | None = None,
    cache_dir=None,
    max_iter: int = 500,
) -> dict[float, WeightTable]:
    """Calibrate weight tables for several target ``h`` values at once.

    The simulated blocks and the length-cost densities do not depend on h,
    so solving q99 and q999 tables together shares the expensive half of the
    precomputation.  Returns {h: WeightTable}; cached tables are loaded, and
    only the missing ones are solved.
    """
    cfg = cfg or FkConfig()
    if k < 3 or m < 0:
        raise ValidationError("need k >= 3 and m >= 0")
    hs = [float(h) for h in hs]
    n = int(draws_per_point or cfg.lambda_draws)

    out: dict[float, WeightTable] = {}
    missing = []
    for h in hs:
        cached = _cache.lookup_table(
            cache_dir, "lambda", k, m, h, cfg.level, cfg.xi_grid, cfg.w, cfg.seed, n
        )
        if cached is not None:
            out[h] = WeightTable.from_payload(cached)
        else:
            missing.append(h)
    if not missing:
        return out

    lhs, targets = _assemble_blocks(k, m, missing, cfg, n, STREAM_LAMBDA)
    for h in missing:
        masses, certificate = _fit_masses(lhs, targets[h], cfg, n, max_iter)
        table = WeightTable(k, m, h, cfg.level, cfg.xi_grid.copy(), masses, certificate)
        if cache_dir is not None:
            _cache.save_table(cache_dir, table.to_payload(cfg, n))
        out[h] = table
    return out


def solve_lambda(
    k: int,
    m: int,
    h: float,
    cfg: FkConfig | None = None,
    draws_per_point: int | None = None,
    cache_dir=None,
    max_iter: int = 500,
) -> WeightTable:
    """Calibrate the Lagrange masses for one (k, m, h) problem.

    Simulates ``draws_per_point`` blocks under every grid xi, then drives
    the simulated coverage profile of the quantile set to ``cfg.level`` at
    every grid point simultaneously (tolerance: the larger of
    ``cfg.coverage_tol`` and 1.2 Monte Carlo standard errors).  The returned
    table carries a certificate with the final coverage profile.  Raises
    SolverError with the deviation profile if the iteration cap is reached.
    """
    return solve_lambda_many(
        k, m, [h], cfg, draws_per_point=draws_per_point, cache_dir=cache_dir, max_iter=max_iter
    )[float(h)]


def verify_coverage(
    table: WeightTable,
    cfg: FkConfig | None = None,
    draws_per_point: int | None = None,
) -> dict:
    """Out-of-sample coverage check of a weight table on fresh draws.

    Uses an independent substream from the solver's, so the returned profile
    is an unbiased estimate of the true coverage at each grid xi.
    """
    cfg = cfg or FkConfig()
    n = int(draws_per_point or cfg.lambda_draws)
    lhs, targets = _assemble_blocks(
        table.k, table.m, [table.h], cfg, n, STREAM_LAMBDA_VERIFY
    )
    loglam = np.log(np.maximum(table.masses, 1e-300))
    cov = _coverage_profile(loglam, lhs, targets[table.h])
    return {
        "coverage": cov,
        "mc_std_err": math.sqrt(cfg.level * (1.0 - cfg.level) / n),
        "draws_per_point": n,
    }
