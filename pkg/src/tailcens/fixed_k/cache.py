"""Persistent storage for simulated critical-value and coverage-weight tables.

Tables are self-describing JSON documents keyed by everything that affects
their content: kind, (k, m, h), level, the hypothesis grid and averaging
measure, the seed, and the draw budget.  Floats are serialized with their
shortest round-trip representation, so save/load is bit-exact and saving an
unchanged table rewrites an identical file.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

import numpy as np

from ..errors import ValidationError

__all__ = [
    "TABLE_FORMAT",
    "cache_dir_from_env",
    "table_filename",
    "save_table",
    "load_table",
    "lookup_table",
]

TABLE_FORMAT = "tailcens-table"
TABLE_VERSION = 1
CACHE_ENV_VAR = "TAILCENS_CACHE"


def cache_dir_from_env() -> Path | None:
    """Cache directory from the TAILCENS_CACHE environment variable, if set."""
    val = os.environ.get(CACHE_ENV_VAR)
    return Path(val) if val else None


def _grid_key(xi_grid, w) -> str:
    h = hashlib.sha1()
    h.update(np.ascontiguousarray(np.asarray(xi_grid, dtype=float)).tobytes())
    h.update(np.ascontiguousarray(np.asarray(w, dtype=float)).tobytes())
    return h.hexdigest()[:10]


def table_filename(
    kind: str, k: int, m: int, h: float | None, level: float, xi_grid, w, seed: int, draws: int
) -> str:
    mid = "" if h is None else f"_h{float(h):g}"
    return (
        f"{kind}_k{int(k)}_m{int(m)}{mid}_l{float(level):g}"
        f"_g{_grid_key(xi_grid, w)}_s{int(seed)}_d{int(draws)}.json"
    )


def save_table(directory, payload: dict) -> Path:
    """Write a table payload to its canonical filename under ``directory``."""
    required = {"format", "version", "kind", "k", "m", "h", "level", "xi_grid", "w", "seed", "draws"}
    missing = required - payload.keys()
    if missing:
        raise ValidationError(f"table payload missing fields: {sorted(missing)}")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    name = table_filename(
        payload["kind"],
        payload["k"],
        payload["m"],
        payload["h"],
        payload["level"],
        payload["xi_grid"],
        payload["w"],
        payload["seed"],
        payload["draws"],
    )
    path = directory / name
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False)
    path.write_text(text)
    return path


def load_table(path) -> dict:
    """Load and validate a table file written by :func:`save_table`."""
    path = Path(path)
    payload = json.loads(path.read_text())
    if payload.get("format") != TABLE_FORMAT:
        raise ValidationError(f"{path} is not a {TABLE_FORMAT} file")
    if payload.get("version") != TABLE_VERSION:
        raise ValidationError(f"{path} has unsupported version {payload.get('version')}")
    return payload


def lookup_table(
    directory, kind: str, k: int, m: int, h: float | None, level: float, xi_grid, w, seed: int, draws: int
) -> dict | None:
    """Return the cached payload when present, else None."""
    if directory is None:
        return None
    path = Path(directory) / table_filename(kind, k, m, h, level, xi_grid, w, seed, draws)
    if not path.exists():
        return None
    return load_table(path)


def new_payload(kind: str, k: int, m: int, h: float | None, cfg, draws: int) -> dict:
    """Common header fields for a fresh table payload."""
    return {
        "format": TABLE_FORMAT,
        "version": TABLE_VERSION,
        "kind": kind,
        "k": int(k),
        "m": int(m),
        "h": None if h is None else float(h),
        "level": float(cfg.level),
        "xi_grid": [float(v) for v in cfg.xi_grid],
        "w": [float(v) for v in cfg.w],
        "seed": int(cfg.seed),
        "draws": int(draws),
    }
