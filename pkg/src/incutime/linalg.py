"""Small dense symmetric positive definite solves.

The solver and the information-matrix pipeline only ever factor matrices of
the order of the support size (a few dozen at most), so a plain Cholesky
loop is plenty and lets failure report the offending pivot instead of
silently regularizing.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular

from .errors import SingularMatrixError


def check_symmetric(a: np.ndarray, tol: float = 1e-12) -> None:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    scale = max(1.0, float(np.abs(a).max()) if a.size else 1.0)
    if a.size and float(np.abs(a - a.T).max()) > tol * scale:
        raise ValueError("matrix is not symmetric")


def cholesky_factor(a: np.ndarray) -> np.ndarray:
    """Lower-triangular L with L L^T = a; raises on a non-positive pivot."""
    check_symmetric(a)
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    low = np.zeros_like(a)
    for j in range(n):
        d = a[j, j] - low[j, :j] @ low[j, :j]
        if not np.isfinite(d) or d <= 0.0:
            raise SingularMatrixError(pivot=j)
        low[j, j] = np.sqrt(d)
        if j + 1 < n:
            low[j + 1 :, j] = (a[j + 1 :, j] - low[j + 1 :, :j] @ low[j, :j]) / low[j, j]
    return low


def spd_solve(a: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    low = cholesky_factor(a)
    y = solve_triangular(low, np.asarray(rhs, dtype=float), lower=True)
    return solve_triangular(low.T, y, lower=False)


def spd_invert(a: np.ndarray) -> np.ndarray:
    low = cholesky_factor(a)
    eye = np.eye(a.shape[0])
    y = solve_triangular(low, eye, lower=True)
    return solve_triangular(low.T, y, lower=False)
