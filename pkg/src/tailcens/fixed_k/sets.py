"""Length-optimal confidence sets for extreme quantiles.

Given a calibrated weight table, the confidence set for the self-normalized
quantile position y is

    S(x*) = { y : sum_g W_g kappafa_g(x*)  <  sum_g Lambda_g f_g(y, x*) },

evaluated pointwise in y.  The set need not be an interval; this module
locates its boundary points by scanning and bisection and reports both the
raw components and their hull.  Mapping back to data units is affine:
Q = Y_(m+k) + (Y_(m+1) - Y_(m+k)) * y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from ..data import ConfidenceInterval, TailData
from ..errors import SolverError, ValidationError
from .config import FkConfig
from .core import SelfNormalized, self_normalize
from .densities import log_joint_table, log_kappaf_table, table_for
from .weights import WeightTable, q_ev

__all__ = ["QuantileSet", "quantile_set", "ci_quantile_fk"]

_SCAN_POINTS = 64
_MAX_EXPANSIONS = 40
_REL_TOL = 1e-3


@dataclass(frozen=True)
class QuantileSet:
    """Confidence set for the self-normalized quantile position.

    ``intervals`` are the disjoint components in ascending order (possibly
    empty); ``hull`` spans the first left endpoint to the last right one.
    """

    intervals: tuple
    level: float

    @property
    def is_empty(self) -> bool:
        return len(self.intervals) == 0

    @property
    def hull(self) -> tuple[float, float]:
        if self.is_empty:
            raise ValidationError("empty set has no hull")
        return (self.intervals[0][0], self.intervals[-1][1])

    @property
    def total_length(self) -> float:
        return float(sum(b - a for a, b in self.intervals))

    def contains(self, y: float) -> bool:
        return any(a <= y <= b for a, b in self.intervals)


class _SetIndicator:
    """Membership oracle for S(x*): sign of log RHS(y) - log LHS."""

    def __init__(self, xstar: SelfNormalized, table: WeightTable, cfg: FkConfig):
        self.m = xstar.m
        self.h = table.h
        self.grid = table.xi_grid
        self.g = len(self.grid)
        self.loglam = np.log(np.maximum(table.masses, 1e-300))
        self.tab1 = table_for(xstar.values[None, :])
        tabg = self.tab1.tile(self.g)
        logkf = log_kappaf_table(tabg, self.grid, self.m)
        self.log_lhs = float(logsumexp(np.log(cfg.w) + logkf))

    def margin(self, y: np.ndarray) -> np.ndarray:
        """log RHS(y) - log LHS for a vector of y values; > 0 means inside."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        ny = len(y)
        tabr = self.tab1.tile(ny * self.g)
        xi_rows = np.tile(self.grid, ny)
        y_rows = np.repeat(y, self.g)
        logf = log_joint_table(tabr, xi_rows, self.m, self.h, y_rows).reshape(ny, self.g)
        log_rhs = logsumexp(logf + self.loglam[None, :], axis=1)
        return log_rhs - self.log_lhs


def _initial_window(table: WeightTable) -> tuple[float, float]:
    qs = np.array([q_ev(float(x), table.h) for x in table.xi_grid])
    lo = min(float(np.min(qs)), 0.0)
    hi = max(float(np.max(qs)), 1.0)
    span = max(hi - lo, 1.0)
    return lo - 0.5 * span, hi + 2.0 * span


def quantile_set(
    xstar: SelfNormalized, table: WeightTable, cfg: FkConfig | None = None
) -> QuantileSet:
    """Evaluate the confidence set for the quantile position at ``x*``.

    Scans a window seeded by the grid of candidate quantile positions,
    expands it geometrically until the indicator is negative at both ends,
    and bisects every sign change to relative resolution 1e-3.  Components
    are returned in ascending order.
    """
    cfg = cfg or FkConfig()
    if xstar.m != table.m or xstar.k != table.k:
        raise ValidationError(
            f"weight table is for (k={table.k}, m={table.m}); data has (k={xstar.k}, m={xstar.m})"
        )
    ind = _SetIndicator(xstar, table, cfg)

    lo, hi = _initial_window(table)
    ys = np.linspace(lo, hi, _SCAN_POINTS)
    marg = ind.margin(ys)
    for _ in range(_MAX_EXPANSIONS):
        grew = False
        if marg[0] > 0:
            width = ys[-1] - ys[0]
            ext = np.linspace(ys[0] - width, ys[0], _SCAN_POINTS, endpoint=False)
            ys = np.concatenate([ext, ys])
            marg = np.concatenate([ind.margin(ext), marg])
            grew = True
        if marg[-1] > 0:
            width = ys[-1] - ys[0]
            ext = np.linspace(ys[-1], ys[-1] + width, _SCAN_POINTS + 1)[1:]
            ys = np.concatenate([ys, ext])
            marg = np.concatenate([marg, ind.margin(ext)])
            grew = True
        if not grew:
            break
    else:
        raise SolverError(
            "quantile set does not close within the search window",
            diagnostics={"window": (float(ys[0]), float(ys[-1]))},
        )

    inside = marg > 0
    if not np.any(inside):
        # a nonempty set may hide between scan points; refine before giving up
        for factor in (4, 16):
            fine = np.linspace(ys[0], ys[-1], _SCAN_POINTS * factor)
            fm = ind.margin(fine)
            if np.any(fm > 0):
                ys, marg, inside = fine, fm, fm > 0
                break
        else:
            return QuantileSet((), cfg.level)

    # locate all boundaries: pairs straddling each sign change
    flips = np.nonzero(inside[1:] != inside[:-1])[0]
    lo_ends = ys[flips]
    hi_ends = ys[flips + 1]
    # vectorized bisection of all boundaries at once
    for _ in range(60):
        widths = hi_ends - lo_ends
        scale = np.maximum(1.0, np.maximum(np.abs(lo_ends), np.abs(hi_ends)))
        if np.all(widths <= _REL_TOL * scale):
            break
        mids = 0.5 * (lo_ends + hi_ends)
        pos = ind.margin(mids) > 0
        rising = ~inside[flips]  # sign goes -> inside at this boundary
        go_left = pos == rising
        hi_ends = np.where(go_left, mids, hi_ends)
        lo_ends = np.where(go_left, lo_ends, mids)
    bounds = 0.5 * (lo_ends + hi_ends)

    intervals = []
    open_left = None
    if inside[0]:
        open_left = float(ys[0])
    for j, b in enumerate(bounds):
        if inside[flips[j] + 1] and not inside[flips[j]]:
            open_left = float(b)
        else:
            intervals.append((open_left, float(b)))
            open_left = None
    if open_left is not None:
        intervals.append((open_left, float(ys[-1])))
    return QuantileSet(tuple(intervals), cfg.level)


def ci_quantile_fk(
    data: TailData,
    p: float,
    table: WeightTable,
    cfg: FkConfig | None = None,
    xstar: SelfNormalized | None = None,
) -> ConfidenceInterval:
    """Confidence interval (set hull) for Q(1-p), in data units.

    ``table`` must be calibrated for this data shape: k and m must match
    and h = p*n must equal the table's h.  The self-normalized set is mapped
    back through the observed tail block affinely.
    """
    cfg = cfg or FkConfig()
    h = p * data.n
    if not math.isclose(h, table.h, rel_tol=1e-9, abs_tol=0.0):
        raise ValidationError(
            f"weight table targets h={table.h:g} but p*n={h:g}; "
            "precompute a table for this target"
        )
    if xstar is None:
        xstar = self_normalize(data)
    qset = quantile_set(xstar, table, cfg)
    obs = data.observed_values
    y_hi, y_lo = float(obs[0]), float(obs[-1])
    spread = y_hi - y_lo
    if qset.is_empty:
        return ConfidenceInterval(
            y_hi, y_hi, cfg.level, "fk", note="empty quantile set; degenerate at Y_(m+1)"
        )
    a, b = qset.hull
    note = None
    if len(qset.intervals) > 1:
        note = f"disconnected set ({len(qset.intervals)} components); hull reported"
    return ConfidenceInterval(y_lo + spread * a, y_lo + spread * b, cfg.level, "fk", note=note)
