"""Likelihood weights linking observations to candidate mass points.

Each observation contributes a likelihood term that is linear in the masses:
``sum_j p_j * w_i(j)``.  In single mode the weight is an indicator of the
onset interval; in double mode it is the piecewise-linear kernel obtained by
integrating the day CDF over the onset window.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleRecordError
from .model import SINGLE, Dataset, Grid


def indicator_weight(j: int, e: int, s: int) -> float:
    """1 if day j lies in the onset interval (s - e, s], else 0."""
    return 1.0 if (s - e) < j <= s else 0.0


def _ramp(c, t):
    # (c - t) on 0 < t <= c, else 0; the building block of the window kernel
    return (c - t) * ((t > 0) & (t <= c))


def psi_weight(e, s_l, s_r, t):
    """Window kernel for a doubly censored record.

    psi(e, s_l, s_r, t) = (s_r - t)1{t in (0, s_r]} - (s_l - t)1{t in (0, s_l]}
                          - (s_r - e - t)1{t in (0, s_r - e]}
                          + (s_l - e - t)1{t in (0, s_l - e]}

    Summed against masses it reproduces the integral of F(u) - F(u - e) over
    the onset window (s_l, s_r] for any distribution with masses on positive
    integer days.  Broadcasts over array arguments.
    """
    e = np.asarray(e, dtype=float)
    s_l = np.asarray(s_l, dtype=float)
    s_r = np.asarray(s_r, dtype=float)
    t = np.asarray(t, dtype=float)
    out = (
        _ramp(s_r, t)
        - _ramp(s_l, t)
        - _ramp(s_r - e, t)
        + _ramp(s_l - e, t)
    )
    if out.ndim == 0:
        return float(out)
    return out


def window_weight(e, s_l, s_r, t):
    """Likelihood weight of the day-t mass for an onset window (s_l, s_r].

    With day-averaged masses the exact window likelihood is
    sum_{u=s_l+1}^{s_r} {Fbar(u) - Fbar(u-e)}, which is psi_weight with both
    bounds advanced by one day.  This pairing also collapses a one-day window
    onto the known-onset-day indicator row, keeping the two modes consistent.
    """
    return psi_weight(e, np.asarray(s_l) + 1, np.asarray(s_r) + 1, t)


@dataclass(frozen=True)
class WeightMatrix:
    """Per-observation weights over the grid, stored as a dense array.

    Rows touch only a handful of grid points, but at these sizes dense
    vectorized products beat sparse row iteration, so the dense block is the
    working representation; ``row_indices``/``row_weights`` give the sparse
    row view.
    """

    dense: np.ndarray
    grid: Grid

    @property
    def n(self) -> int:
        return int(self.dense.shape[0])

    @property
    def m(self) -> int:
        return int(self.dense.shape[1])

    def row_indices(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.dense[i])

    def row_weights(self, i: int) -> np.ndarray:
        return self.dense[i, self.row_indices(i)]

    def likelihood_terms(self, masses: np.ndarray) -> np.ndarray:
        """sum_j p_j w_i(j) for every observation."""
        return self.dense @ masses


def build_weight_matrix(data: Dataset, grid: Grid) -> WeightMatrix:
    """Evaluate all weights on the grid; every row must hit a positive weight."""
    pts = grid.points[None, :]
    if data.mode == SINGLE:
        lo = (data.s - data.e)[:, None]
        hi = data.s[:, None]
        dense = ((pts > lo) & (pts <= hi)).astype(float)
    else:
        dense = window_weight(
            data.e[:, None], data.s_l[:, None], data.s_r[:, None], pts
        )
    feasible = (dense > 0.0).any(axis=1)
    if not feasible.all():
        idx = int(np.flatnonzero(~feasible)[0])
        raise InfeasibleRecordError(idx)
    return WeightMatrix(dense=dense, grid=grid)
