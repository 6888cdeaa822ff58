"""Disk cache for the expensive solver artifacts.

The cache root is taken from the LPPDET_CACHE_DIR environment variable,
defaulting to ~/.cache/lppdet.  Entries are keyed by a digest of their
construction parameters and carry the format version of their payload;
a version mismatch or an unreadable file causes a silent recompute and
overwrite, never an error.
"""

from __future__ import annotations

import hashlib
import os
from pathlib import Path

from .errors import LppdetError
from .painleve import PiiSolution, solve_hastings_mcleod

__all__ = ["CACHE_ENV_VAR", "cache_root", "cached_pii_solution"]

CACHE_ENV_VAR = "LPPDET_CACHE_DIR"


def cache_root() -> Path:
    env = os.environ.get(CACHE_ENV_VAR)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "lppdet"


def _pii_cache_path(
    x_min: float, x_right: float, tol: float, grid_step: float
) -> Path:
    key = repr((PiiSolution.FORMAT_VERSION, x_min, x_right, tol, grid_step))
    digest = hashlib.sha256(key.encode()).hexdigest()[:16]
    return cache_root() / f"pii-{digest}.npz"


def cached_pii_solution(
    x_min: float = -9.0,
    x_right: float = 8.0,
    tol: float = 1e-13,
    grid_step: float = 0.005,
) -> tuple[PiiSolution, bool]:
    """Load the distinguished ODE solution from disk, or solve and store.

    Returns (solution, cache_hit).
    """
    path = _pii_cache_path(x_min, x_right, tol, grid_step)
    if path.exists():
        try:
            return PiiSolution.load_npz(path), True
        except (LppdetError, OSError, ValueError, KeyError):
            pass
    sol = solve_hastings_mcleod(
        x_min=x_min, x_right=x_right, tol=tol, grid_step=grid_step
    )
    path.parent.mkdir(parents=True, exist_ok=True)
    sol.save_npz(path)
    return sol, False
