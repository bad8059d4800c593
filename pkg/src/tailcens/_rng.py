"""Deterministic, splittable random streams for reproducible simulation.

Every simulation loop in this package draws from named substreams derived
from a root seed.  A substream is identified by an integer path, so the
stream used by replication ``i`` (or by the null simulation for grid point
``j``) can be reconstructed independently of execution order or worker
count, making all Monte Carlo output bit-reproducible.
"""

from __future__ import annotations

import numpy as np

__all__ = ["substream"]

# Registry of substream path tags.  Every simulation loop prefixes its path
# with one of these so no two consumers can collide on the same stream.
STREAM_MC_REP = 1  # (STREAM_MC_REP, replication_index)
STREAM_CV_TABLE = 3  # (STREAM_CV_TABLE, k, m, grid_index)
STREAM_LAMBDA = 4  # (STREAM_LAMBDA, k, m, grid_index)
STREAM_LAMBDA_VERIFY = 5  # (STREAM_LAMBDA_VERIFY, k, m, grid_index)
STREAM_CV_DIRECT = 6  # (STREAM_CV_DIRECT, k, m, nanokey(xi0))


def substream(seed: int, *path: int) -> np.random.Generator:
    """Return the counter-based generator for substream ``path`` under ``seed``.

    The same ``(seed, path)`` pair always yields an identical stream, and
    distinct paths yield statistically independent streams.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))
