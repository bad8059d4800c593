"""Command-line interface: validate data, analyze tails, simulate, precompute.

Subcommands
-----------
ingest-validate   check a CSV against the censoring conventions and summarize
analyze           tail-index / extreme-quantile intervals for a dataset
simulate          run a Monte Carlo experiment (coverage/length/bias table)
precompute        build and cache critical-value or weight tables

Exit codes: 0 success, 2 validation/domain error, 3 solver non-convergence.
The cache directory may be set with the TAILCENS_CACHE environment variable.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .censored_mle import ci_index_ml, ci_quantile_ml, fit_mle
from .data import TailData
from .distributions import DgpSpec
from .errors import DomainError, SolverError, ValidationError
from .fixed_k.cache import cache_dir_from_env
from .fixed_k.config import FkConfig
from .fixed_k.lr import ci_index_fk, cv_table
from .fixed_k.sets import ci_quantile_fk
from .fixed_k.weights import solve_lambda, verify_coverage
from .montecarlo import HYBRID_K_CUTOFF, McConfig, run_experiment
from .baselines import gi, hill

__all__ = ["Dataset", "ingest_csv", "analyze", "precompute", "main"]

_TRUTHY = {"1", "true", "t", "yes", "y"}
_FALSY = {"0", "false", "f", "no", "n", ""}


@dataclass(frozen=True)
class Dataset:
    """A validated sample with its censoring annotations.

    ``values`` are the recorded observations (censored entries recorded at
    the threshold); ``censored`` flags them.  ``m_override`` covers data
    where censored observations were dropped rather than recorded: only the
    count above the largest recorded value is known.
    """

    values: np.ndarray
    censored: np.ndarray
    threshold: float | None
    m_override: int | None
    name: str

    @property
    def n(self) -> int:
        return len(self.values) + (self.m_override or 0)

    @property
    def m(self) -> int:
        if self.m_override is not None:
            return self.m_override
        return int(np.count_nonzero(self.censored))

    def tail_data(self, k: int) -> TailData:
        order = np.sort(self.values)[::-1]
        m = self.m
        if self.m_override is not None:
            if len(order) < k + 1:
                raise ValidationError("need at least k+1 recorded values")
            u = float(order[k])
            exceed = order[:k] - u
            return TailData(exceed, m, u, self.n, T=None)
        if len(order) < m + k + 1:
            raise ValidationError("need at least m+k+1 recorded values")
        u = float(order[m + k])
        exceed = order[m : m + k] - u
        return TailData(exceed, m, u, self.n, T=self.threshold)


def _parse_flag(raw: str, row: int) -> bool:
    v = raw.strip().lower()
    if v in _TRUTHY:
        return True
    if v in _FALSY:
        return False
    raise ValidationError(f"row {row}: unrecognized censoring flag {raw!r}")


def ingest_csv(
    path,
    value_column: str,
    censor_column: str | None = None,
    threshold: float | None = None,
    m_override: int | None = None,
) -> Dataset:
    """Read and validate a CSV sample.

    Censoring can be declared three ways: an explicit flag column, a
    recording threshold (values at or above it are censored; values above
    it are inconsistent), or an ``m_override`` count for data whose censored
    observations were removed entirely.  Flag/threshold combinations are
    cross-checked row by row and all offending rows are reported at once.
    """
    if m_override is not None and (censor_column or threshold is not None):
        raise ValidationError("m_override excludes censor_column/threshold")
    path = Path(path)
    values: list[float] = []
    flags: list[bool] = []
    bad_rows: list[str] = []
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValidationError(f"{path}: missing header row")
        if value_column not in reader.fieldnames:
            raise ValidationError(f"{path}: no column named {value_column!r}")
        if censor_column is not None and censor_column not in reader.fieldnames:
            raise ValidationError(f"{path}: no column named {censor_column!r}")
        for i, record in enumerate(reader, start=2):  # header is line 1
            raw = (record.get(value_column) or "").strip()
            try:
                val = float(raw)
            except ValueError:
                bad_rows.append(f"row {i}: value {raw!r} is not a number")
                continue
            if not math.isfinite(val):
                bad_rows.append(f"row {i}: value {raw!r} is not finite")
                continue
            flag = False
            if censor_column is not None:
                flag = _parse_flag(record.get(censor_column) or "", i)
            if threshold is not None:
                if val > threshold:
                    bad_rows.append(f"row {i}: value {val:g} above the threshold {threshold:g}")
                    continue
                if censor_column is not None:
                    if flag and val != threshold:
                        bad_rows.append(
                            f"row {i}: flagged censored but value {val:g} != threshold"
                        )
                        continue
                    if not flag and val == threshold:
                        bad_rows.append(f"row {i}: at the threshold but not flagged censored")
                        continue
                else:
                    flag = val >= threshold
            values.append(val)
            flags.append(flag)
    if bad_rows:
        raise ValidationError(
            f"{path}: {len(bad_rows)} invalid rows:\n  " + "\n  ".join(bad_rows[:50])
        )
    if not values:
        raise ValidationError(f"{path}: no data rows")
    return Dataset(
        values=np.asarray(values, dtype=float),
        censored=np.asarray(flags, dtype=bool),
        threshold=threshold,
        m_override=m_override,
        name=path.name,
    )


def analyze(
    dataset: Dataset,
    k: int | None = None,
    k_rule: float = 0.05,
    quantiles: tuple = (),
    with_index: bool = True,
    method: str = "auto",
    level: float = 0.95,
    seed: int = 0,
    cache_dir=None,
    lambda_draws: int | None = None,
) -> dict:
    """Tail analysis report for a dataset.

    ``method`` is one of auto / ml / fk / hill / gi; "auto" routes by the
    hybrid rule (MLE branch for k > 250, fixed-k branch otherwise).  Each
    requested quantile level q is estimated as Q(q) with tail probability
    p = 1 - q.  Returns a JSON-serializable report.
    """
    if method not in ("auto", "ml", "fk", "hill", "gi"):
        raise ValidationError(f"unknown method {method!r}")
    k_res = k if k is not None else int(round(k_rule * dataset.n))
    tail = dataset.tail_data(k_res)
    fkc = FkConfig(level=level, seed=seed)
    rows = []

    def add(target, ci, point=None):
        rows.append(
            {
                "target": target,
                "method": ci.method,
                "lo": ci.lo,
                "hi": ci.hi,
                "level": ci.level,
                "point": point,
                "note": ci.note,
            }
        )

    branch = method
    if method == "auto":
        branch = "ml" if tail.k > HYBRID_K_CUTOFF else "fk"

    if with_index:
        if branch in ("hill", "gi"):
            order = np.sort(dataset.values)[::-1]
            fit = {"hill": hill, "gi": gi}[branch](order, k_res)
            add("index", fit.ci(level), fit.xi_hat)
        elif branch == "ml":
            fit = fit_mle(tail)
            add("index", ci_index_ml(fit, tail.k, level), fit.params.xi)
        else:
            add("index", ci_index_fk(tail, fkc, cache_dir=cache_dir))
    for q in quantiles:
        if not (0.0 < q < 1.0):
            raise ValidationError("quantile levels must lie in (0, 1)")
        p = 1.0 - q
        if branch in ("hill", "gi"):
            raise ValidationError(f"{branch} provides index estimates only")
        if branch == "ml":
            fit = fit_mle(tail)
            from .censored_mle import quantile_point

            add(f"q={q:g}", ci_quantile_ml(fit, tail, p, level), quantile_point(fit, tail, p))
        else:
            table = solve_lambda(
                tail.k, tail.m, p * tail.n, fkc, draws_per_point=lambda_draws, cache_dir=cache_dir
            )
            add(f"q={q:g}", ci_quantile_fk(tail, p, table, fkc))

    return {
        "dataset": dataset.name,
        "n": dataset.n,
        "m": dataset.m,
        "censored_share": dataset.m / dataset.n,
        "k": tail.k,
        "cutoff": tail.u,
        "results": rows,
    }


def precompute(
    kind: str,
    k: int,
    m: int,
    h: float | None = None,
    cfg: FkConfig | None = None,
    cache_dir=None,
    verify_draws: int | None = None,
) -> dict:
    """Build and cache a cv or lambda table; returns a small summary dict."""
    cfg = cfg or FkConfig()
    cache_dir = cache_dir or cache_dir_from_env()
    if cache_dir is None:
        raise ValidationError("precompute needs --cache-dir or TAILCENS_CACHE")
    if kind == "cv":
        values = cv_table(k, m, cfg, cache_dir=cache_dir)
        return {"kind": "cv", "k": k, "m": m, "points": len(values)}
    if kind == "lambda":
        if h is None:
            raise ValidationError("lambda tables need --h (the target p*n)")
        table = solve_lambda(k, m, h, cfg, cache_dir=cache_dir)
        out = {
            "kind": "lambda",
            "k": k,
            "m": m,
            "h": h,
            "max_abs_dev": table.certificate.get("max_abs_dev"),
            "iterations": table.certificate.get("iterations"),
        }
        if verify_draws:
            check = verify_coverage(table, cfg, draws_per_point=verify_draws)
            cov = check["coverage"]
            out["verify_max_abs_dev"] = float(np.max(np.abs(cov - cfg.level)))
            out["verify_mc_std_err"] = check["mc_std_err"]
        return out
    raise ValidationError('kind must be "cv" or "lambda"')


# ---------------------------------------------------------------------------
# argument parsing / rendering
# ---------------------------------------------------------------------------


def _add_ingest_args(p: argparse.ArgumentParser):
    p.add_argument("--csv", required=True, help="input CSV path")
    p.add_argument("--value-column", required=True, help="column with the observations")
    p.add_argument("--censor-column", default=None, help="column flagging censored rows")
    p.add_argument("--threshold", type=float, default=None, help="censoring threshold")
    p.add_argument(
        "--m-override",
        type=int,
        default=None,
        help="count of removed censored observations above the recorded maximum",
    )


def _render_table(rows: list[dict], columns: list[str]) -> str:
    widths = {c: max(len(c), *(len(_fmt(r.get(c))) for r in rows)) for c in columns}
    head = "  ".join(c.ljust(widths[c]) for c in columns)
    lines = [head, "  ".join("-" * widths[c] for c in columns)]
    for r in rows:
        lines.append("  ".join(_fmt(r.get(c)).ljust(widths[c]) for c in columns))
    return "\n".join(lines)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="tailcens",
        description="Tail-index and extreme-quantile inference under upper-tail censoring",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p_val = sub.add_parser("ingest-validate", help="validate a CSV and summarize it")
    _add_ingest_args(p_val)

    p_an = sub.add_parser("analyze", help="tail inference for a dataset")
    _add_ingest_args(p_an)
    p_an.add_argument("--k", type=int, default=None, help="number of observed tail values")
    p_an.add_argument("--k-rule", type=float, default=0.05, help="k = round(rule * n)")
    p_an.add_argument("--no-index", action="store_true", help="skip the tail-index target")
    p_an.add_argument(
        "--quantile",
        type=float,
        action="append",
        default=[],
        help="quantile level to estimate (repeatable), e.g. 0.99",
    )
    p_an.add_argument("--method", default="auto", choices=["auto", "ml", "fk", "hill", "gi"])
    p_an.add_argument("--level", type=float, default=0.95)
    p_an.add_argument("--seed", type=int, default=0)
    p_an.add_argument("--lambda-draws", type=int, default=None)
    p_an.add_argument("--cache-dir", default=None)
    p_an.add_argument("--format", default="table", choices=["table", "json", "csv"])

    p_sim = sub.add_parser("simulate", help="Monte Carlo coverage experiment")
    p_sim.add_argument("--dgp", required=True, choices=["gpd", "abs_t2", "f44", "dpln"])
    p_sim.add_argument("--n", type=int, required=True)
    p_sim.add_argument("--cen-p", type=float, default=0.0, help="censored upper-tail share")
    p_sim.add_argument("--reps", type=int, default=1000)
    p_sim.add_argument("--k", type=int, default=None)
    p_sim.add_argument("--k-rule", type=float, default=0.05)
    p_sim.add_argument("--methods", default="hill,gi,ml,fk")
    p_sim.add_argument("--targets", default="index")
    p_sim.add_argument("--level", type=float, default=0.95)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--cv-draws", type=int, default=20_000)
    p_sim.add_argument("--lambda-draws", type=int, default=1_200)
    p_sim.add_argument("--cache-dir", default=None)
    p_sim.add_argument("--format", default="table", choices=["table", "json", "csv"])

    p_pre = sub.add_parser("precompute", help="build and cache fixed-k tables")
    p_pre.add_argument("kind", choices=["cv", "lambda"])
    p_pre.add_argument("--k", type=int, required=True)
    p_pre.add_argument("--m", type=int, required=True)
    p_pre.add_argument("--h", type=float, default=None, help="target p*n (lambda tables)")
    p_pre.add_argument("--level", type=float, default=0.95)
    p_pre.add_argument("--seed", type=int, default=0)
    p_pre.add_argument("--cv-draws", type=int, default=100_000)
    p_pre.add_argument("--lambda-draws", type=int, default=20_000)
    p_pre.add_argument("--verify-draws", type=int, default=None)
    p_pre.add_argument("--cache-dir", default=None)
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "ingest-validate":
            ds = ingest_csv(
                args.csv, args.value_column, args.censor_column, args.threshold, args.m_override
            )
            print(
                json.dumps(
                    {
                        "dataset": ds.name,
                        "n": ds.n,
                        "m": ds.m,
                        "censored_share": ds.m / ds.n,
                        "min": float(np.min(ds.values)),
                        "max": float(np.max(ds.values)),
                    },
                    indent=2,
                )
            )
            return 0

        if args.command == "analyze":
            ds = ingest_csv(
                args.csv, args.value_column, args.censor_column, args.threshold, args.m_override
            )
            report = analyze(
                ds,
                k=args.k,
                k_rule=args.k_rule,
                quantiles=tuple(args.quantile),
                with_index=not args.no_index,
                method=args.method,
                level=args.level,
                seed=args.seed,
                cache_dir=args.cache_dir or cache_dir_from_env(),
                lambda_draws=args.lambda_draws,
            )
            if args.format == "json":
                print(json.dumps(report, indent=2))
            elif args.format == "csv":
                cols = ["target", "method", "point", "lo", "hi", "level", "note"]
                print(",".join(cols))
                for r in report["results"]:
                    print(",".join(_fmt(r.get(c)) for c in cols))
            else:
                print(
                    f"dataset={report['dataset']} n={report['n']} m={report['m']} "
                    f"censored={report['censored_share']:.3%} k={report['k']} "
                    f"cutoff={report['cutoff']:.6g}"
                )
                print(
                    _render_table(
                        report["results"], ["target", "method", "point", "lo", "hi", "note"]
                    )
                )
            return 0

        if args.command == "simulate":
            cfg = McConfig(
                dgp=DgpSpec(kind=args.dgp),
                n=args.n,
                cen_p=args.cen_p,
                reps=args.reps,
                k=args.k,
                k_rule=args.k_rule,
                methods=tuple(s.strip() for s in args.methods.split(",") if s.strip()),
                targets=tuple(s.strip() for s in args.targets.split(",") if s.strip()),
                level=args.level,
                seed=args.seed,
                cv_draws=args.cv_draws,
                lambda_draws=args.lambda_draws,
                cache_dir=args.cache_dir or cache_dir_from_env(),
            )
            report = run_experiment(cfg)
            if args.format == "json":
                print(report.to_json())
            elif args.format == "csv":
                print(report.to_csv())
            else:
                print(
                    f"dgp={report.dgp} n={report.n} cen_p={report.cen_p} "
                    f"k={report.k} reps={report.reps}"
                )
                rows = [vars(r) for r in report.rows]
                print(
                    _render_table(
                        rows,
                        ["method", "target", "coverage", "avg_length", "bias", "failures"],
                    )
                )
            return 0

        if args.command == "precompute":
            cfg = FkConfig(
                level=args.level,
                seed=args.seed,
                cv_draws=args.cv_draws,
                lambda_draws=args.lambda_draws,
            )
            out = precompute(
                args.kind,
                args.k,
                args.m,
                h=args.h,
                cfg=cfg,
                cache_dir=args.cache_dir,
                verify_draws=args.verify_draws,
            )
            print(json.dumps(out, indent=2))
            return 0
    except (ValidationError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        diag = getattr(exc, "diagnostics", None)
        if diag:
            print(json.dumps(diag, indent=2, default=str), file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
