"""Observed information matrices and Wald-type confidence intervals.

With fitted mass points i_1 < ... < i_l, the free parameters are the masses
at the first l - 1 points (the last one is determined by normalization).
The observed information matrix is inverted and mapped through partial sums
to a covariance for the day CDF values at the mass points; step-function
extension then yields a variance for every day up to m1, and Wald intervals
follow after dividing by the sample size.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateFitError, SingularMatrixError
from .linalg import spd_invert
from .model import SINGLE, Dataset, DayCdf, Grid, MassFunction, cdf_from_mass
from .solver import SolverConfig, fit_npmle
from .weights import window_weight

Z_QUANTILES = {0.90: 1.645, 0.95: 1.96, 0.99: 2.576}


@dataclass(frozen=True)
class IntervalRow:
    day: int
    estimate: float
    lower: float
    upper: float
    method: str
    variance: float
    raw_lower: float = None
    raw_upper: float = None

    def __post_init__(self):
        if self.raw_lower is None:
            object.__setattr__(self, "raw_lower", self.lower)
        if self.raw_upper is None:
            object.__setattr__(self, "raw_upper", self.upper)


@dataclass
class IntervalTable:
    """Per-day point estimates with confidence bounds and method metadata."""

    rows: list
    metadata: dict = field(default_factory=dict)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["day", "estimate", "lower", "upper", "method", "variance"]
            )
            for r in self.rows:
                writer.writerow(
                    [
                        r.day,
                        f"{r.estimate:.12g}",
                        f"{r.lower:.12g}",
                        f"{r.upper:.12g}",
                        r.method,
                        f"{r.variance:.12g}",
                    ]
                )


@dataclass(frozen=True)
class FisherResult:
    """Observed information pipeline output for one fitted distribution."""

    support: np.ndarray
    fisher: np.ndarray
    inverse: np.ndarray
    cdf_cov: np.ndarray
    variances: np.ndarray
    used_pseudo_inverse: bool = False
    replicates_skipped: int = 0


def _denominators_singly(data: Dataset, fhat: DayCdf) -> np.ndarray:
    return fhat.value_at(data.s) - fhat.value_at(data.s - data.e)


def _masses_from_cdf(fhat: DayCdf) -> np.ndarray:
    return np.diff(fhat.values, prepend=0.0)


def observed_fisher_singly(
    data: Dataset, fhat: DayCdf, support: np.ndarray
) -> np.ndarray:
    """Observed information for single mode data.

    f_jk = (1/n) sum_i (1_i(j) - 1_i(m)) (1_i(k) - 1_i(m)) / denom_i^2,
    where 1_i(t) indicates t in (s_i - e_i, s_i], m is the last mass point
    and denom_i the fitted probability of record i.
    """
    support = np.asarray(support, dtype=int)
    if support.size < 2:
        raise DegenerateFitError("information matrix needs at least 2 mass points")
    denom = _denominators_singly(data, fhat)
    bad = np.flatnonzero(denom <= 0.0)
    if bad.size:
        raise DegenerateFitError(
            f"record {int(bad[0])} has zero fitted probability"
        )
    lo = (data.s - data.e)[:, None]
    hi = data.s[:, None]
    ind = ((support[None, :] > lo) & (support[None, :] <= hi)).astype(float)
    centered = (ind[:, :-1] - ind[:, [-1]]) / denom[:, None]
    fisher = (centered.T @ centered) / data.n
    return 0.5 * (fisher + fisher.T)


def observed_fisher_doubly(
    data: Dataset, fhat: DayCdf, support: np.ndarray
) -> np.ndarray:
    """Observed information for double mode data.

    Same structure as the single mode matrix with the window kernel in place
    of the interval indicator: each record contributes the outer product of
    psi(., t) - psi(., m) over the first l - 1 mass points, scaled by the
    squared fitted window probability.
    """
    support = np.asarray(support, dtype=int)
    if support.size < 2:
        raise DegenerateFitError("information matrix needs at least 2 mass points")
    masses = _masses_from_cdf(fhat)
    days = np.arange(1, fhat.last_day + 1)
    kernel_all = window_weight(
        data.e[:, None], data.s_l[:, None], data.s_r[:, None], days[None, :]
    )
    denom = kernel_all @ masses
    bad = np.flatnonzero(denom <= 0.0)
    if bad.size:
        raise DegenerateFitError(
            f"record {int(bad[0])} has zero fitted window probability"
        )
    kernel_sup = window_weight(
        data.e[:, None], data.s_l[:, None], data.s_r[:, None], support[None, :]
    )
    centered = (kernel_sup[:, :-1] - kernel_sup[:, [-1]]) / denom[:, None]
    fisher = (centered.T @ centered) / data.n
    return 0.5 * (fisher + fisher.T)


def averaged_inverse_information(
    data: Dataset,
    grid: Grid,
    solver_config: SolverConfig,
    support: np.ndarray,
    b: int,
    seed,
) -> tuple[np.ndarray, int]:
    """Mean inverse observed information over resampled-and-refitted datasets.

    Each replicate resamples the records, refits the masses, evaluates the
    observed information on the given (original) support with the replicate's
    own fit in the denominators, and inverts it.  The inverses are averaged,
    not the matrices: a mean of inverses dominates the inverse of the mean,
    and that inflation is what widens the intervals relative to the
    single-sample matrix (averaging the matrices reproduces the single-sample
    variances almost exactly and gains nothing).  Replicates whose refit
    fails, degenerates, or yields a singular matrix are skipped and counted.
    Averaging over b = 1 reproduces the inverse of the plain matrix of that
    single resample.
    """
    from .bootstrap import resample
    from .errors import (
        InfeasiblePointError,
        LineSearchError,
        NonConvergenceError,
        RankDeficiencyError,
    )

    if b < 1:
        raise ValueError("averaging count b must be >= 1")
    total = None
    used = 0
    skipped = 0
    for k in range(b):
        replicate = resample(data, seed, k)
        try:
            mass, _ = fit_npmle(replicate, grid, solver_config)
            fhat = cdf_from_mass(mass, grid)
            matrix = observed_fisher_doubly(replicate, fhat, support)
            inverse = spd_invert(matrix)
        except (
            NonConvergenceError,
            DegenerateFitError,
            RankDeficiencyError,
            LineSearchError,
            InfeasiblePointError,
            SingularMatrixError,
        ):
            skipped += 1
            continue
        total = inverse if total is None else total + inverse
        used += 1
    if total is None:
        raise DegenerateFitError("every averaging replicate failed to refit")
    return total / used, skipped


def _invert_information(fisher: np.ndarray) -> tuple[np.ndarray, bool]:
    try:
        return spd_invert(fisher), False
    except SingularMatrixError as exc:
        warnings.warn(
            f"observed information matrix is numerically singular ({exc}); "
            "falling back to a pseudo-inverse. Bootstrap intervals are more "
            "reliable for this fit.",
            RuntimeWarning,
            stacklevel=3,
        )
        return np.linalg.pinv(fisher), True


def cdf_covariance(fisher: np.ndarray) -> np.ndarray:
    """Covariance of the day CDF at the mass points: A F^{-1} A' with A the
    lower-triangular all-ones partial sum matrix."""
    inverse, _ = _invert_information(fisher)
    ones = np.tril(np.ones_like(inverse))
    return ones @ inverse @ ones.T


def extend_variances(
    cdf_cov: np.ndarray, support: np.ndarray, m1: int
) -> np.ndarray:
    """Step-function extension of the mass point variances to days 1..m1.

    Days before the first mass point and from the last mass point onward get
    variance 0 (the fitted day CDF is exactly 0 or 1 there); any other day
    inherits the variance of the nearest mass point at or below it.
    """
    support = np.asarray(support, dtype=int)
    diag = np.diag(cdf_cov)
    if diag.size != support.size - 1:
        raise ValueError("covariance order must be one less than the support size")
    out = np.zeros(m1)
    for j in range(support.size - 1):
        lo = support[j]
        hi = min(int(support[j + 1]), m1 + 1)
        if lo <= m1:
            out[lo - 1 : hi - 1] = diag[j]
    return out


def wald_intervals(
    fhat: DayCdf,
    variances: np.ndarray,
    n: int,
    points,
    level: float = 0.95,
    method: str = "wald",
) -> IntervalTable:
    """Symmetric intervals F(t) +/- z * sqrt(variance_t / n), clipped to [0, 1].

    The unclipped bounds are retained on each row as raw_lower/raw_upper.
    """
    if level not in Z_QUANTILES:
        raise ValueError(f"level must be one of {sorted(Z_QUANTILES)}")
    z = Z_QUANTILES[level]
    points = list(points)
    m1 = variances.shape[0]
    rows = []
    for day in points:
        day = int(day)
        if day < 1 or day > m1:
            raise ValueError(f"evaluation day {day} outside 1..{m1}")
        est = fhat.value(day)
        var = float(variances[day - 1])
        half = z * np.sqrt(var / n)
        raw_lo, raw_hi = est - half, est + half
        rows.append(
            IntervalRow(
                day=day,
                estimate=est,
                lower=max(raw_lo, 0.0),
                upper=min(raw_hi, 1.0),
                method=method,
                variance=var,
                raw_lower=raw_lo,
                raw_upper=raw_hi,
            )
        )
    return IntervalTable(rows=rows, metadata={"n": n, "level": level})


def fisher_result(
    data: Dataset,
    grid: Grid,
    mass: MassFunction,
    m1: int,
    averaging: int | None = None,
    solver_config: SolverConfig | None = None,
    seed=0,
) -> FisherResult:
    """Full pipeline from a fitted mass function to per-day variances."""
    support = mass.support
    if support.size < 2:
        raise DegenerateFitError(
            "variance estimation needs at least 2 fitted mass points"
        )
    fhat = cdf_from_mass(mass, grid)
    skipped = 0
    if data.mode == SINGLE:
        fisher = observed_fisher_singly(data, fhat, support)
        inverse, used_pinv = _invert_information(fisher)
    elif averaging is None:
        fisher = observed_fisher_doubly(data, fhat, support)
        inverse, used_pinv = _invert_information(fisher)
    else:
        inverse, skipped = averaged_inverse_information(
            data, grid, solver_config or SolverConfig(), support, averaging, seed
        )
        # the information implied by the averaged inverse, for reporting
        fisher, used_pinv = _invert_information(inverse)
    ones = np.tril(np.ones_like(inverse))
    cov = ones @ inverse @ ones.T
    variances = extend_variances(cov, support, m1)
    return FisherResult(
        support=support,
        fisher=fisher,
        inverse=inverse,
        cdf_cov=cov,
        variances=variances,
        used_pseudo_inverse=used_pinv,
        replicates_skipped=skipped,
    )
