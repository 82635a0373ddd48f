"""Support reduction solver for the day-resolution maximum likelihood problem.

The estimator minimizes, over nonnegative mass vectors p on the grid,

    phi(p) = -(1/n) sum_i log(sum_j p_j w_i(j)) + sum_j p_j - 1,

whose unit-slope linear term acts as a built-in Lagrange multiplier: at the
minimum the masses sum to one without explicit renormalization.  A solution
is certified by the two cone optimality conditions

    (i)  dphi/dp_j >= 0 for every grid point j,
    (ii) sum_j p_j dphi/dp_j = 0,

both enforced at ``SolverConfig.tol``.  Each outer iteration minimizes the
local quadratic expansion of phi over the cone by alternately growing and
shrinking a candidate support set, then takes a backtracking (Armijo) step
toward the subproblem solution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InfeasiblePointError,
    LineSearchError,
    NonConvergenceError,
    RankDeficiencyError,
    SingularMatrixError,
)
from .linalg import spd_solve
from .model import DOUBLE, Dataset, Grid, MassFunction
from .weights import WeightMatrix, build_weight_matrix


@dataclass(frozen=True)
class SolverConfig:
    """Tunable knobs for the support reduction solver.

    tol:            certificate tolerance for both optimality conditions
    max_outer:      outer iteration cap
    armijo_c:       sufficient-decrease constant of the line search
    armijo_shrink:  step shrink factor of the line search
    inner_tol:      gradient tolerance of the quadratic subproblem
    init_point:     optional starting support day (defaults to the grid
                    point nearest the median observed onset)
    """

    tol: float = 1e-10
    max_outer: int = 500
    armijo_c: float = 1e-4
    armijo_shrink: float = 0.5
    inner_tol: float = 1e-12
    init_point: int | None = None


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    criterion: float
    min_gradient: float
    complementarity: float
    support_size: int


@dataclass
class IterationTrace:
    """Per-outer-iteration progress record."""

    rows: list = field(default_factory=list)
    converged: bool = False
    final_masses: np.ndarray | None = None

    def to_text(self) -> str:
        lines = ["iter,criterion,min_grad,complementarity,support_size"]
        for r in self.rows:
            lines.append(
                f"{r.iteration},{r.criterion:.10f},{r.min_gradient:.10f},"
                f"{r.complementarity:.10f},{r.support_size}"
            )
        return "\n".join(lines) + "\n"

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_text())


def phi(p: np.ndarray, weights: WeightMatrix) -> float:
    """Criterion value; raises if any likelihood term vanishes."""
    terms = weights.dense @ p
    bad = np.flatnonzero(terms <= 0.0)
    if bad.size:
        raise InfeasiblePointError(int(bad[0]))
    return float(-np.mean(np.log(terms)) + p.sum() - 1.0)


def phi_gradient(p: np.ndarray, weights: WeightMatrix) -> np.ndarray:
    """dphi/dp_j = 1 - (1/n) sum_i w_i(j) / (sum_k p_k w_i(k))."""
    terms = weights.dense @ p
    bad = np.flatnonzero(terms <= 0.0)
    if bad.size:
        raise InfeasiblePointError(int(bad[0]))
    return 1.0 - (weights.dense.T @ (1.0 / terms)) / weights.n


def fenchel_residuals(p: np.ndarray, weights: WeightMatrix) -> tuple[float, float]:
    """(min over the full grid of dphi/dp_j, |<p, grad phi>|)."""
    grad = phi_gradient(p, weights)
    return float(grad.min()), float(abs(p @ grad))


class _QuadraticModel:
    """Second-order expansion of phi at p0, shared across one inner pass.

    With d_i = sum_j p0_j w_i(j) the model is Q(p) = (1/2) p'Gp - b'p where
    G_kl = (1/n) sum_i w_i(k) w_i(l) / d_i^2 and
    b_k  = (2/n) sum_i w_i(k) / d_i - 1.
    G is the exact Hessian and grad Q(p0) = grad phi(p0), so minimizing Q
    over the cone is a projected Newton step.
    """

    def __init__(self, weights: WeightMatrix, p0: np.ndarray):
        d = weights.dense @ p0
        bad = np.flatnonzero(d <= 0.0)
        if bad.size:
            raise InfeasiblePointError(int(bad[0]))
        scaled = weights.dense / d[:, None]
        self._wcols = weights.dense
        self.b = 2.0 * scaled.mean(axis=0) - 1.0
        self.gram = (scaled.T @ scaled) / weights.n

    def solve(self, support: list[int]) -> np.ndarray:
        """Unconstrained normal-equation solve restricted to the support.

        Exactly duplicated weight columns make the normal matrix singular;
        such later duplicates are dropped and given zero mass.  Any other
        singularity is a genuine rank deficiency.
        """
        idx = np.asarray(support, dtype=int)
        try:
            return spd_solve(self.gram[np.ix_(idx, idx)], self.b[idx])
        except SingularMatrixError:
            keep, dropped = [], []
            for pos, j in enumerate(support):
                dup = any(
                    np.array_equal(self._wcols[:, j], self._wcols[:, k])
                    for k in support[:pos]
                )
                (dropped if dup else keep).append(pos)
            if not dropped:
                raise RankDeficiencyError(support) from None
            kept_idx = idx[keep]
            try:
                sub = spd_solve(self.gram[np.ix_(kept_idx, kept_idx)], self.b[kept_idx])
            except SingularMatrixError:
                raise RankDeficiencyError(support) from None
            out = np.zeros(len(support))
            out[keep] = sub
            return out

    def gradient(self, support: list[int], masses: np.ndarray) -> np.ndarray:
        """Model gradient over the full grid at the embedded support solution."""
        if len(support) == 0:
            return -self.b.copy()
        idx = np.asarray(support, dtype=int)
        return self.gram[:, idx] @ masses - self.b


def _inner_loop(
    model: _QuadraticModel,
    start_support: list[int],
    m: int,
    inner_tol: float,
) -> tuple[np.ndarray, list[int]]:
    """Minimize the quadratic model over the nonnegative cone.

    Alternates between dropping the most negative mass point and adding the
    off-support point with the most negative model gradient, re-solving the
    normal equations after every change.
    """
    support = sorted(set(int(j) for j in start_support))
    masses = model.solve(support)
    just_added: int | None = None
    for _ in range(10 * m + 100):
        while masses.size and masses.min() < 0.0:
            worst = int(np.argmin(masses))
            if support[worst] == just_added:
                # the freshly added point cannot be the one removed; see the
                # active-set exchange argument for nonnegative least squares
                raise RuntimeError(
                    "inner loop attempted to remove the point it just added"
                )
            support.pop(worst)
            masses = model.solve(support) if support else np.empty(0)
        grad = model.gradient(support, masses)
        if support:
            grad = grad.copy()
            grad[np.asarray(support, dtype=int)] = np.inf
        candidate = int(np.argmin(grad))
        if grad[candidate] >= -inner_tol:
            break
        position = int(np.searchsorted(np.asarray(support, dtype=int), candidate))
        support.insert(position, candidate)
        just_added = candidate
        masses = model.solve(support)
    else:
        raise NonConvergenceError("quadratic subproblem did not settle on a support")
    full = np.zeros(m)
    if support:
        full[np.asarray(support, dtype=int)] = masses
    return full, support


def solve_quadratic_subproblem(
    support: list[int], p0: np.ndarray, weights: WeightMatrix
) -> np.ndarray:
    """Signed normal-equation solution on a fixed support, denominators from p0."""
    return _QuadraticModel(weights, p0).solve(list(support))


def inner_support_loop(
    p0: np.ndarray,
    weights: WeightMatrix,
    start_support: list[int] | None = None,
    inner_tol: float = 1e-12,
) -> tuple[np.ndarray, list[int]]:
    """Cone minimizer of the quadratic model at p0 (full-grid vector, support)."""
    if start_support is None:
        start_support = [int(np.argmax(p0))]
    model = _QuadraticModel(weights, p0)
    return _inner_loop(model, start_support, weights.m, inner_tol)


def armijo_search(
    p0: np.ndarray,
    p_target: np.ndarray,
    weights: WeightMatrix,
    config: SolverConfig,
) -> tuple[np.ndarray, float]:
    """Backtrack along the segment from p0 to p_target until phi decreases enough.

    Returns the accepted iterate and the step length alpha.  Infeasible trial
    points count as infinite criterion values.  Gives up below alpha = 1e-15.
    """
    delta = p_target - p0
    if not np.any(delta):
        return p0.copy(), 1.0
    slope = float(phi_gradient(p0, weights) @ delta)
    base = phi(p0, weights)
    resolution = 8.0 * np.finfo(float).eps * max(1.0, abs(base))
    if config.armijo_c * abs(slope) <= resolution:
        # the predicted decrease is below the floating point resolution of
        # the criterion, so no backtracking test can verify it; take the
        # full step unless it visibly increases the criterion
        try:
            value = phi(p_target, weights)
        except InfeasiblePointError:
            value = np.inf
        if value <= base + resolution:
            return p_target.copy(), 1.0
    alpha = 1.0
    while alpha >= 1e-15:
        trial = p0 + alpha * delta
        try:
            value = phi(trial, weights)
        except InfeasiblePointError:
            value = np.inf
        if value <= base + config.armijo_c * alpha * slope:
            return trial, alpha
        alpha *= config.armijo_shrink
    raise LineSearchError("no acceptable step length above 1e-15")


def _initial_support_index(data: Dataset, grid: Grid, config: SolverConfig) -> int:
    if config.init_point is not None:
        return grid.index_of(int(config.init_point))
    if data.mode == DOUBLE:
        center = float(np.median((data.s_l + data.s_r) / 2.0))
    else:
        center = float(np.median(data.s))
    return int(np.argmin(np.abs(grid.points - center)))


def _minimize(
    weights: WeightMatrix, init_index: int, config: SolverConfig
) -> tuple[np.ndarray, IterationTrace]:
    m = weights.m
    current = np.full(m, 1.0 / m)
    support = [init_index]
    trace = IterationTrace()
    min_grad, comp = fenchel_residuals(current, weights)
    iteration = 0
    while min_grad < -config.tol or comp > config.tol:
        iteration += 1
        if iteration > config.max_outer:
            trace.final_masses = current
            raise NonConvergenceError(
                f"no optimality certificate after {config.max_outer} outer iterations",
                trace=trace,
            )
        model = _QuadraticModel(weights, current)
        target, support = _inner_loop(model, support, m, config.inner_tol)
        try:
            current, _ = armijo_search(current, target, weights, config)
        except LineSearchError:
            trace.final_masses = current
            raise NonConvergenceError(
                "line search stalled before reaching the certificate tolerance",
                trace=trace,
            ) from None
        min_grad, comp = fenchel_residuals(current, weights)
        trace.rows.append(
            TraceRow(
                iteration=iteration,
                criterion=phi(current, weights),
                min_gradient=min_grad,
                complementarity=comp,
                support_size=int(np.count_nonzero(current > 0.0)),
            )
        )
    trace.converged = True
    trace.final_masses = current.copy()
    return current, trace


def fit_npmle(
    data: Dataset, grid: Grid, config: SolverConfig | None = None
) -> tuple[MassFunction, IterationTrace]:
    """Maximum likelihood masses for a validated dataset on a grid.

    Parameters
    ----------
    data : Dataset
        Validated observations (see ``validate_dataset``).
    grid : Grid
        Candidate mass point days; every record must put positive weight on
        at least one grid point.
    config : SolverConfig, optional
        Solver tolerances; the defaults certify optimality at 1e-10.

    Returns
    -------
    (MassFunction, IterationTrace)
        The fitted masses and the outer iteration trace, which also carries
        the raw converged grid vector in ``final_masses``.

    Raises
    ------
    InfeasibleRecordError
        If some record has zero weight at every grid point.
    NonConvergenceError
        If no certificate is reached within ``config.max_outer`` iterations.
    """
    config = config or SolverConfig()
    weights = build_weight_matrix(data, grid)
    init_index = _initial_support_index(data, grid, config)
    masses, trace = _minimize(weights, init_index, config)
    positive = masses > 0.0
    fitted = MassFunction(support=grid.points[positive], probs=masses[positive])
    return fitted, trace
