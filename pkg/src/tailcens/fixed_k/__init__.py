"""Fixed-k small-sample inference from the top order statistics.

Treats the number of observed tail values k as fixed while n grows, works
with the exact joint extreme-value limit of the top m+k order statistics
(m censored, k observed), and inverts weighted likelihood-ratio tests to get
confidence sets for the tail index and for extreme quantiles.
"""

from .config import DEFAULT_XI_GRID, FkConfig
from .core import SelfNormalized, joint_density_fx, self_normalize, simulate_tail_ev
from .densities import (
    density_fxstar,
    joint_density_ystar_xstar,
    kappa_density,
    log_density_fxstar,
    log_joint_density_ystar_xstar,
    log_kappa_density,
)
from .lr import ci_index_fk, critical_value, cv_table, lr_stat
from .sets import QuantileSet, ci_quantile_fk, quantile_set
from .weights import WeightTable, q_ev, solve_lambda, solve_lambda_many, verify_coverage

__all__ = [
    "DEFAULT_XI_GRID",
    "FkConfig",
    "QuantileSet",
    "SelfNormalized",
    "WeightTable",
    "ci_index_fk",
    "ci_quantile_fk",
    "critical_value",
    "cv_table",
    "density_fxstar",
    "joint_density_fx",
    "joint_density_ystar_xstar",
    "kappa_density",
    "log_density_fxstar",
    "log_joint_density_ystar_xstar",
    "log_kappa_density",
    "lr_stat",
    "q_ev",
    "quantile_set",
    "self_normalize",
    "simulate_tail_ev",
    "solve_lambda",
    "solve_lambda_many",
    "verify_coverage",
]
