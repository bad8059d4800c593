"""Tail-index and extreme-quantile inference when the upper tail is censored.

The package provides a censored-tail maximum-likelihood branch built on the
generalized Pareto approximation, a fixed-k small-sample branch built on the
exact joint law of the top order statistics, classical baselines, and a
Monte Carlo harness for comparing them.
"""

from .baselines import BaselineFit, gi, hill
from .censored_mle import (
    GpdFit,
    ci_index_ml,
    ci_quantile_ml,
    fisher_info,
    fit_mle,
    neg_loglik,
    quantile_point,
)
from .data import ConfidenceInterval, TailData
from .distributions import DgpSpec, GpdParams, dgp_sample, dgp_true_quantile, gpd_cdf, gpd_quantile
from .errors import DomainError, QuadratureError, SolverError, ValidationError
from .fixed_k import (
    FkConfig,
    SelfNormalized,
    WeightTable,
    ci_index_fk,
    ci_quantile_fk,
    critical_value,
    cv_table,
    density_fxstar,
    joint_density_fx,
    joint_density_ystar_xstar,
    kappa_density,
    lr_stat,
    q_ev,
    quantile_set,
    self_normalize,
    simulate_tail_ev,
    solve_lambda,
    verify_coverage,
)
from .montecarlo import HYBRID_K_CUTOFF, McConfig, McReport, McRow, hybrid_dispatch, run_experiment

__version__ = "0.1.0"

__all__ = [
    "BaselineFit",
    "ConfidenceInterval",
    "DgpSpec",
    "DomainError",
    "FkConfig",
    "GpdFit",
    "GpdParams",
    "HYBRID_K_CUTOFF",
    "McConfig",
    "McReport",
    "McRow",
    "QuadratureError",
    "SelfNormalized",
    "SolverError",
    "TailData",
    "ValidationError",
    "WeightTable",
    "ci_index_fk",
    "ci_index_ml",
    "ci_quantile_fk",
    "ci_quantile_ml",
    "critical_value",
    "cv_table",
    "density_fxstar",
    "dgp_sample",
    "dgp_true_quantile",
    "fisher_info",
    "fit_mle",
    "gi",
    "gpd_cdf",
    "gpd_quantile",
    "hill",
    "hybrid_dispatch",
    "joint_density_fx",
    "joint_density_ystar_xstar",
    "kappa_density",
    "lr_stat",
    "neg_loglik",
    "q_ev",
    "quantile_point",
    "quantile_set",
    "run_experiment",
    "self_normalize",
    "simulate_tail_ev",
    "solve_lambda",
    "verify_coverage",
    "__version__",
]
