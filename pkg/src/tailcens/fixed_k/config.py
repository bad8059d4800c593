"""Configuration for the fixed-k small-sample tail inference procedures."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError

__all__ = ["DEFAULT_XI_GRID", "FkConfig"]

# 50 equally spaced tail-index hypotheses on (0, 1]
DEFAULT_XI_GRID = np.arange(1, 51, dtype=float) / 50.0


def _as_grid(values) -> np.ndarray:
    g = np.asarray(values, dtype=float)
    if g.ndim != 1 or len(g) < 2:
        raise ValidationError("xi_grid must be a one-dimensional vector with >= 2 points")
    if np.any(np.diff(g) <= 0):
        raise ValidationError("xi_grid must be strictly increasing")
    if g[0] <= 0 or g[-1] > 1.0 + 1e-12:
        raise ValidationError("xi_grid must lie inside (0, 1]")
    return g


@dataclass(frozen=True)
class FkConfig:
    """Knobs of the fixed-k procedures.

    ``xi_grid`` is the hypothesis grid for test inversion and the support of
    the weighting measures; ``weights`` is the averaging measure W over the
    grid (uniform when None).  ``cv_draws`` is the simulation budget for
    critical values and ``lambda_draws`` the per-grid-point budget when
    calibrating quantile-set weight tables.  ``seed`` fixes every internal
    substream, making all derived tables reproducible bit for bit.
    """

    xi_grid: np.ndarray = field(default_factory=lambda: DEFAULT_XI_GRID.copy())
    weights: np.ndarray | None = None
    level: float = 0.95
    cv_draws: int = 100_000
    lambda_draws: int = 20_000
    seed: int = 0
    refine_boundary: bool = False
    coverage_tol: float = 0.001

    def __post_init__(self):
        object.__setattr__(self, "xi_grid", _as_grid(self.xi_grid))
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != self.xi_grid.shape:
                raise ValidationError("weights must match xi_grid in length")
            if np.any(w < 0) or not np.isclose(w.sum(), 1.0, atol=1e-9):
                raise ValidationError("weights must be nonnegative and sum to 1")
            object.__setattr__(self, "weights", w)
        if not (0.0 < self.level < 1.0):
            raise ValidationError("level must lie in (0, 1)")
        if self.cv_draws < 100 or self.lambda_draws < 100:
            raise ValidationError("simulation budgets must be at least 100 draws")

    @property
    def w(self) -> np.ndarray:
        """The averaging measure W (uniform by default)."""
        if self.weights is not None:
            return self.weights
        n = len(self.xi_grid)
        return np.full(n, 1.0 / n)

    def grid_key(self) -> str:
        """Stable short hash of (grid, W) for cache-file naming."""
        h = hashlib.sha1()
        h.update(np.ascontiguousarray(self.xi_grid).tobytes())
        h.update(np.ascontiguousarray(self.w).tobytes())
        return h.hexdigest()[:10]
