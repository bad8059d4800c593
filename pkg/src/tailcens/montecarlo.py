"""Monte Carlo harness: coverage, length, and bias of tail-inference methods.

One experiment fixes a data-generating process, a sample size, and a
censoring fraction, then repeatedly: draws a sample, censors everything
above the population (1 - cen_p)-quantile, forms the tail block of the k
largest observed values below the m censored ones, and applies each method
to each target.  Replication draws are shared across methods, so reported
differences between methods are not polluted by simulation noise.

The fixed-k branch needs simulated critical values (index target) and
calibrated weight tables (quantile targets) per realized censored count m;
replications are grouped by m and the tables are built once per group,
with the expensive halves shared across targets.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ._rng import STREAM_MC_REP, substream
from .baselines import gi, hill
from .censored_mle import ci_index_ml, ci_quantile_ml, fit_mle, quantile_point
from .data import ConfidenceInterval, TailData
from .distributions import DgpSpec, dgp_sample, dgp_true_quantile
from .errors import DomainError, ValidationError
from .fixed_k.config import FkConfig
from .fixed_k.core import SelfNormalized, self_normalize
from .fixed_k.lr import ci_index_fk, cv_table
from .fixed_k.sets import quantile_set
from .fixed_k.weights import solve_lambda_many

__all__ = [
    "McConfig",
    "McRow",
    "McReport",
    "run_experiment",
    "hybrid_dispatch",
    "HYBRID_K_CUTOFF",
]

HYBRID_K_CUTOFF = 250
_TARGET_P = {"q99": 0.01, "q999": 0.001}


@dataclass(frozen=True)
class McConfig:
    """One experiment of the replication harness.

    ``cen_p`` is the censored upper-tail fraction (the threshold is the
    population (1-cen_p)-quantile; 0 disables censoring).  ``k_rule`` sets
    k = round(k_rule * n) unless ``k`` is given explicitly.  ``cv_draws``
    and ``lambda_draws`` are the fixed-k table budgets used by the harness.
    """

    dgp: DgpSpec
    n: int
    cen_p: float = 0.0
    reps: int = 1000
    k: int | None = None
    k_rule: float = 0.05
    methods: tuple = ("hill", "gi", "ml", "fk")
    targets: tuple = ("index",)
    level: float = 0.95
    seed: int = 0
    cv_draws: int = 20_000
    lambda_draws: int = 1_200
    cache_dir: str | None = None

    def resolved_k(self) -> int:
        k = self.k if self.k is not None else int(round(self.k_rule * self.n))
        if k < 3:
            raise ValidationError("experiment needs k >= 3")
        return k

    def fk_config(self) -> FkConfig:
        return FkConfig(
            level=self.level,
            seed=self.seed,
            cv_draws=self.cv_draws,
            lambda_draws=self.lambda_draws,
        )

    def __post_init__(self):
        if not (0.0 <= self.cen_p < 1.0):
            raise ValidationError("cen_p must lie in [0, 1)")
        if self.reps < 1:
            raise ValidationError("reps must be positive")
        bad_t = set(self.targets) - ({"index"} | set(_TARGET_P))
        if bad_t:
            raise ValidationError(f"unknown targets: {sorted(bad_t)}")
        bad_m = set(self.methods) - {"hill", "gi", "ml", "fk"}
        if bad_m:
            raise ValidationError(f"unknown methods: {sorted(bad_m)}")


@dataclass(frozen=True)
class McRow:
    """Aggregated performance of one (method, target) cell."""

    method: str
    target: str
    truth: float
    coverage: float
    avg_length: float
    bias: float | None
    mc_std_err: float
    reps_used: int
    failures: int


@dataclass
class McReport:
    """Results of one experiment: the config echo, truths, and cell rows."""

    dgp: str
    n: int
    cen_p: float
    k: int
    reps: int
    seed: int
    truths: dict
    rows: list[McRow] = field(default_factory=list)

    def row(self, method: str, target: str) -> McRow:
        for r in self.rows:
            if r.method == method and r.target == target:
                return r
        raise KeyError(f"no row for ({method}, {target})")

    def to_json(self) -> str:
        doc = {
            "dgp": self.dgp,
            "n": self.n,
            "cen_p": self.cen_p,
            "k": self.k,
            "reps": self.reps,
            "seed": self.seed,
            "truths": self.truths,
            "rows": [vars(r) for r in self.rows],
        }
        return json.dumps(doc, sort_keys=True, indent=2)

    def to_csv(self) -> str:
        header = "method,target,truth,coverage,avg_length,bias,mc_std_err,reps_used,failures"
        lines = [header]
        for r in self.rows:
            bias = "" if r.bias is None else f"{r.bias:.6g}"
            lines.append(
                f"{r.method},{r.target},{r.truth:.6g},{r.coverage:.4f},"
                f"{r.avg_length:.6g},{bias},{r.mc_std_err:.4f},{r.reps_used},{r.failures}"
            )
        return "\n".join(lines)


@dataclass
class _Rep:
    """Per-replication tail block and quick-method results."""

    tail: TailData | None
    xstar: SelfNormalized | None
    results: dict  # (method, target) -> (ConfidenceInterval | None, point | None)
    ml_failed: bool = False
    fk_failed: bool = False


def _make_tail(sample: np.ndarray, t_cens: float | None, k: int) -> TailData:
    n = len(sample)
    if t_cens is None:
        m = 0
        censored = sample
    else:
        m = int(np.count_nonzero(sample > t_cens))
        censored = np.minimum(sample, t_cens)
    order = np.sort(censored)[::-1]
    if n < m + k + 1:
        raise ValidationError("sample too small for the requested tail block")
    u = float(order[m + k])
    exceed = order[m : m + k] - u
    return TailData(exceed, m, u, n, T=t_cens)


def _target_h(target: str, n: int) -> float:
    return _TARGET_P[target] * n


def run_experiment(cfg: McConfig) -> McReport:
    """Run one experiment and aggregate coverage/length/bias per cell.

    Replications are simulated in a deterministic per-replication substream;
    the censoring-aware methods share one tail block per replication, while
    the baselines are fit to the censoring-removed file (values above the
    censoring point dropped).  The fixed-k tables are built per distinct
    realized m (grouped after the replication loop) and persisted under
    ``cfg.cache_dir`` when given.
    """
    k = cfg.resolved_k()
    t_cens = (
        None
        if cfg.cen_p == 0.0
        else dgp_true_quantile(cfg.dgp, 1.0 - cfg.cen_p)
    )
    truths: dict[str, float] = {}
    for target in cfg.targets:
        if target == "index":
            truths[target] = cfg.dgp.true_xi
        else:
            truths[target] = dgp_true_quantile(cfg.dgp, 1.0 - _TARGET_P[target])

    quantile_targets = [t for t in cfg.targets if t != "index"]
    reps: list[_Rep] = []
    for i in range(cfg.reps):
        rng = substream(cfg.seed, STREAM_MC_REP, i)
        sample = dgp_sample(cfg.dgp, cfg.n, rng)
        rep = _Rep(tail=None, xstar=None, results={})
        try:
            tail = _make_tail(sample, t_cens, k)
            rep.tail = tail
        except ValidationError:
            rep.ml_failed = True
            rep.fk_failed = True
            reps.append(rep)
            continue

        # Baselines see the file an analyst without censoring records would
        # see: observations above the censoring point are absent entirely,
        # and the estimators use the top k of what remains.
        observed = np.sort(sample[sample <= t_cens] if t_cens is not None else sample)[::-1]
        for name, estimator in (("hill", hill), ("gi", gi)):
            if name in cfg.methods and "index" in cfg.targets:
                try:
                    fit = estimator(observed, k)
                    rep.results[(name, "index")] = (fit.ci(cfg.level), fit.xi_hat)
                except (ValidationError, DomainError):
                    pass  # counted as a failure during aggregation
        if "ml" in cfg.methods:
            fit = fit_mle(tail)
            if not fit.converged:
                rep.ml_failed = True
            else:
                if "index" in cfg.targets:
                    rep.results[("ml", "index")] = (
                        ci_index_ml(fit, k, cfg.level),
                        fit.params.xi,
                    )
                for target in quantile_targets:
                    p = _TARGET_P[target]
                    rep.results[("ml", target)] = (
                        ci_quantile_ml(fit, tail, p, cfg.level),
                        quantile_point(fit, tail, p),
                    )
        if "fk" in cfg.methods:
            rep.xstar = self_normalize(tail)
        reps.append(rep)

    if "fk" in cfg.methods:
        _run_fk_phase(cfg, k, reps, quantile_targets)

    report = McReport(
        dgp=cfg.dgp.kind,
        n=cfg.n,
        cen_p=cfg.cen_p,
        k=k,
        reps=cfg.reps,
        seed=cfg.seed,
        truths=truths,
    )
    for method in cfg.methods:
        for target in cfg.targets:
            if method in ("hill", "gi") and target != "index":
                continue
            cis, points, used, failed = [], [], 0, 0
            for rep in reps:
                if method == "ml" and rep.ml_failed:
                    failed += 1
                    continue
                if method == "fk" and rep.fk_failed:
                    failed += 1
                    continue
                got = rep.results.get((method, target))
                if got is None:
                    failed += 1
                    continue
                cis.append(got[0])
                points.append(got[1])
                used += 1
            if used == 0:
                report.rows.append(
                    McRow(method, target, truths[target], math.nan, math.nan, None, math.nan, 0, failed)
                )
                continue
            truth = truths[target]
            cover = float(np.mean([ci.contains(truth) for ci in cis]))
            length = float(np.mean([ci.length for ci in cis]))
            pts = [p for p in points if p is not None]
            bias = float(np.mean(pts) - truth) if pts else None
            se = math.sqrt(max(cover * (1.0 - cover), 1e-12) / used)
            report.rows.append(McRow(method, target, truth, cover, length, bias, se, used, failed))
    return report


def _run_fk_phase(cfg: McConfig, k: int, reps: list[_Rep], quantile_targets: list[str]):
    fk_cfg = cfg.fk_config()
    groups: dict[int, list[int]] = {}
    for idx, rep in enumerate(reps):
        if rep.xstar is not None:
            groups.setdefault(rep.xstar.m, []).append(idx)

    want_index = "index" in cfg.targets
    hs = {t: _target_h(t, cfg.n) for t in quantile_targets}
    for m, idxs in sorted(groups.items()):
        if want_index:
            cvs = cv_table(k, m, fk_cfg, cache_dir=cfg.cache_dir)
            for idx in idxs:
                ci = ci_index_fk(reps[idx].xstar, fk_cfg, cvs=cvs)
                reps[idx].results[("fk", "index")] = (ci, None)
        if hs:
            tables = solve_lambda_many(
                k, m, list(hs.values()), fk_cfg, cache_dir=cfg.cache_dir
            )
            for target, h in hs.items():
                table = tables[h]
                for idx in idxs:
                    rep = reps[idx]
                    qset = quantile_set(rep.xstar, table, fk_cfg)
                    obs = rep.tail.observed_values
                    y_top, y_bot = float(obs[0]), float(obs[-1])
                    spread = y_top - y_bot
                    if qset.is_empty:
                        ci = ConfidenceInterval(
                            y_top, y_top, cfg.level, "fk", note="empty quantile set"
                        )
                    else:
                        a, b = qset.hull
                        ci = ConfidenceInterval(
                            y_bot + spread * a, y_bot + spread * b, cfg.level, "fk"
                        )
                    rep.results[("fk", target)] = (ci, None)


def hybrid_dispatch(
    tail: TailData,
    target: str = "index",
    p: float | None = None,
    cfg: FkConfig | None = None,
    cache_dir=None,
    lambda_draws: int | None = None,
) -> ConfidenceInterval:
    """Route to the MLE branch when k > 250, else to the fixed-k branch.

    ``target`` is "index" or "quantile" (the latter needs the tail
    probability ``p``).  The fixed-k quantile branch calibrates (or loads)
    the weight table for h = p*n.
    """
    cfg = cfg or FkConfig()
    if target not in ("index", "quantile"):
        raise ValidationError('target must be "index" or "quantile"')
    if target == "quantile" and p is None:
        raise ValidationError("quantile target needs the tail probability p")

    if tail.k > HYBRID_K_CUTOFF:
        fit = fit_mle(tail)
        if target == "index":
            return ci_index_ml(fit, tail.k, cfg.level)
        return ci_quantile_ml(fit, tail, p, cfg.level)

    if target == "index":
        return ci_index_fk(tail, cfg, cache_dir=cache_dir)
    from .fixed_k.sets import ci_quantile_fk
    from .fixed_k.weights import solve_lambda

    table = solve_lambda(
        tail.k, tail.m, p * tail.n, cfg, draws_per_point=lambda_draws, cache_dir=cache_dir
    )
    return ci_quantile_fk(tail, p, table, cfg)
