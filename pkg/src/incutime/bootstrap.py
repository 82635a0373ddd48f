"""Nonparametric bootstrap confidence intervals for the day CDF.

Records are resampled with replacement, the estimator is refitted on each
replicate, and percentile intervals are built from the replicate deltas
F*_b(t) - F_hat(t): the level-alpha interval at day t is

    [F_hat(t) - q_{1-alpha/2}(deltas), F_hat(t) - q_{alpha/2}(deltas)].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BootstrapFailureError,
    DegenerateFitError,
    InfeasiblePointError,
    InfeasibleRecordError,
    LineSearchError,
    NonConvergenceError,
    RankDeficiencyError,
)
from .inference import IntervalRow, IntervalTable
from .model import Dataset, Grid, cdf_from_mass
from .solver import SolverConfig, _minimize, fit_npmle
from .weights import WeightMatrix, build_weight_matrix


@dataclass(frozen=True)
class BootstrapConfig:
    b: int = 1000
    seed: int = 0
    points: tuple = None

    def __post_init__(self):
        if self.b < 2:
            raise ValueError("bootstrap needs at least 2 replicates")


def _replicate_rng(seed, replicate_index: int) -> np.random.Generator:
    # Child streams keyed on (seed, index) so replicates are independent and
    # any single one can be reproduced in isolation.
    if isinstance(seed, (tuple, list)):
        return np.random.default_rng([*seed, replicate_index])
    return np.random.default_rng([seed, replicate_index])


def resample(data: Dataset, seed, replicate_index: int) -> Dataset:
    rng = _replicate_rng(seed, replicate_index)
    idx = rng.integers(0, data.n, size=data.n)
    return data.take(idx)


_REPLICATE_ERRORS = (
    NonConvergenceError,
    DegenerateFitError,
    RankDeficiencyError,
    LineSearchError,
    InfeasiblePointError,
    InfeasibleRecordError,
)


def _refit_rows(W: WeightMatrix, idx: np.ndarray, config: SolverConfig, init_index: int):
    # Resampling rows of the precomputed weight matrix avoids rebuilding the
    # record-by-day weights for every replicate.
    sub = WeightMatrix(dense=W.dense[idx], grid=W.grid)
    return _minimize(sub, init_index, config)


def bootstrap_ci(
    data: Dataset,
    grid: Grid,
    config: BootstrapConfig,
    solver_config: SolverConfig | None = None,
    level: float = 0.95,
    mass=None,
) -> IntervalTable:
    """Percentile bootstrap intervals at the requested days.

    The point estimate is refitted from the data when ``mass`` is omitted.
    Raises BootstrapFailureError when more than 10 percent of replicates fail
    to refit; failures below that threshold are dropped from the quantiles.
    """
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    solver_config = solver_config or SolverConfig()
    if mass is None:
        mass, _ = fit_npmle(data, grid, solver_config)
    fhat = cdf_from_mass(mass, grid)
    m1 = grid.m1 if grid.m1 is not None else int(grid.points[-1])
    points = config.points if config.points is not None else range(1, m1 + 1)
    points = [int(p) for p in points]
    for day in points:
        if day < 1 or day > m1:
            raise ValueError(f"evaluation day {day} outside 1..{m1}")

    W = build_weight_matrix(data, grid)
    init_index = int(np.argmax(mass.as_vector(grid)))
    estimates = np.array([fhat.value(d) for d in points])
    deltas = np.empty((config.b, len(points)))
    failed = 0
    kept = 0
    for k in range(config.b):
        idx = _replicate_rng(config.seed, k).integers(0, data.n, size=data.n)
        try:
            probs, _ = _refit_rows(W, idx, solver_config, init_index)
        except _REPLICATE_ERRORS:
            failed += 1
            continue
        rep_cdf = np.minimum(np.cumsum(probs), 1.0)
        # grid point j covers days grid.points[j] ..; value at day d is the
        # partial sum over grid points <= d.
        counts = np.searchsorted(grid.points, points, side="right")
        rep_values = np.where(counts > 0, rep_cdf[np.maximum(counts - 1, 0)], 0.0)
        deltas[kept] = rep_values - estimates
        kept += 1
    if failed > 0.1 * config.b:
        raise BootstrapFailureError(
            f"{failed} of {config.b} bootstrap replicates failed to refit",
            failed=failed,
            total=config.b,
        )
    deltas = deltas[:kept]
    alpha = 1.0 - level
    lo_q = np.quantile(deltas, alpha / 2.0, axis=0)
    hi_q = np.quantile(deltas, 1.0 - alpha / 2.0, axis=0)
    variances = data.n * np.var(deltas, axis=0, ddof=1)
    rows = []
    for j, day in enumerate(points):
        rows.append(
            IntervalRow(
                day=day,
                estimate=float(estimates[j]),
                lower=max(float(estimates[j] - hi_q[j]), 0.0),
                upper=min(float(estimates[j] - lo_q[j]), 1.0),
                method="bootstrap",
                variance=float(variances[j]),
                raw_lower=float(estimates[j] - hi_q[j]),
                raw_upper=float(estimates[j] - lo_q[j]),
            )
        )
    return IntervalTable(
        rows=rows,
        metadata={
            "n": data.n,
            "level": level,
            "replicates": config.b,
            "failed": failed,
        },
    )
