"""Shared fixtures: deterministic RNG streams and a small-grid config."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from tailcens import FkConfig
from tailcens._rng import substream

ARTIFACTS = Path(__file__).parent / "_artifacts"


@pytest.fixture
def rng() -> np.random.Generator:
    return substream(20260825, 0)


@pytest.fixture(scope="session")
def small_cfg() -> FkConfig:
    """A deliberately coarse configuration so fixed-k solves run in ~1s.

    FkConfig is frozen, so sharing one instance across the session is safe.
    """
    return FkConfig(
        xi_grid=np.array([0.1, 0.25, 0.4, 0.55, 0.7, 0.85, 1.0]),
        level=0.90,
        cv_draws=2000,
        lambda_draws=250,
        seed=42,
    )


@pytest.fixture(scope="session")
def artifacts_dir() -> Path:
    ARTIFACTS.mkdir(exist_ok=True)
    return ARTIFACTS
