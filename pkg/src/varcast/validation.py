"""Input validation helpers for array-shaped estimator inputs."""

from __future__ import annotations

import numpy as np

from .errors import VarcastError


def check_matrix(Y, name: str = "Y", min_rows: int = 1) -> np.ndarray:
    """Coerce to a 2-D float array and require finite values."""
    arr = np.asarray(Y, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise VarcastError(f"{name} must be 2-dimensional, got ndim={arr.ndim}")
    if arr.shape[0] < min_rows:
        raise VarcastError(f"{name} needs at least {min_rows} rows, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise VarcastError(f"{name} contains non-finite values")
    return arr


def check_constant_columns(arr: np.ndarray, names: list[str]) -> list[str]:
    """Names of columns with zero variation."""
    ptp = arr.max(axis=0) - arr.min(axis=0)
    return [names[j] for j in np.nonzero(ptp == 0)[0]]
