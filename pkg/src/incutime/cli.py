"""Command line interface.

Subcommands
-----------
simulate   draw a synthetic dataset (and optionally the truth curve)
fit        estimate the day-averaged distribution from a dataset CSV
ci         fit plus confidence intervals (wald or bootstrap)
coverage   Monte Carlo coverage study of the interval methods

Exit codes: 0 success, 2 solver did not converge, 3 invalid input or
arguments, 4 infeasible or degenerate data.
"""

from __future__ import annotations

import argparse
import csv
import sys

from .bootstrap import BootstrapConfig, bootstrap_ci
from .errors import (
    BootstrapFailureError,
    DatasetValidationError,
    DegenerateFitError,
    InfeasiblePointError,
    InfeasibleRecordError,
    NonConvergenceError,
)
from .inference import Z_QUANTILES, fisher_result, wald_intervals
from .model import (
    DOUBLE,
    SINGLE,
    Dataset,
    candidate_grid,
    cdf_from_mass,
    validate_dataset,
)
from .simulate import (
    WEIBULL_A,
    WEIBULL_B,
    ExposureSpec,
    TruthSpec,
    draw_doubly,
    draw_singly,
    true_fbar,
)
from .solver import SolverConfig, fit_npmle

_FIT_FAILURES = (
    NonConvergenceError,
    DegenerateFitError,
    InfeasibleRecordError,
    InfeasiblePointError,
    BootstrapFailureError,
)


def parse_points(text: str) -> list:
    """Evaluation days, either "lo:hi" (inclusive) or "d1,d2,..."."""
    text = text.strip()
    if ":" in text:
        lo, hi = text.split(":", 1)
        lo, hi = int(lo), int(hi)
        if hi < lo:
            raise ValueError(f"empty day range {lo}:{hi}")
        return list(range(lo, hi + 1))
    days = [int(part) for part in text.split(",") if part.strip()]
    if not days:
        raise ValueError("no evaluation days given")
    return days


def read_dataset_csv(path: str, mode: str) -> Dataset:
    expected = ["e", "s"] if mode == SINGLE else ["e", "sl", "sr"]
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != expected:
            raise DatasetValidationError(
                f"{path}: expected header {','.join(expected)}"
            )
        columns = [[] for _ in expected]
        for i, row in enumerate(reader):
            if not row:
                continue
            if len(row) != len(expected):
                raise DatasetValidationError(
                    f"{path}: row has {len(row)} fields, expected {len(expected)}",
                    record_index=i,
                )
            for col, cell in zip(columns, row):
                col.append(float(cell))
    if mode == SINGLE:
        data = Dataset.singly(columns[0], columns[1])
    else:
        data = Dataset.doubly(columns[0], columns[1], columns[2])
    return validate_dataset(data)


def write_dataset_csv(path: str, data: Dataset) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if data.mode == SINGLE:
            writer.writerow(["e", "s"])
            for e, s in zip(data.e, data.s):
                writer.writerow([int(e), int(s)])
        else:
            writer.writerow(["e", "sl", "sr"])
            for e, lo, hi in zip(data.e, data.s_l, data.s_r):
                writer.writerow([int(e), int(lo), int(hi)])


def _write_estimate_csv(path, mass, fhat, grid) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["day", "mass", "fbar"])
        for day in grid.points:
            day = int(day)
            writer.writerow(
                [day, f"{mass.mass_at(day):.12g}", f"{fhat.value(day):.12g}"]
            )


def _truth_spec(args) -> TruthSpec:
    if args.model == "weibull":
        a = WEIBULL_A if args.a is None else args.a
        b = WEIBULL_B if args.truth_b is None else args.truth_b
        return TruthSpec(family="weibull", a=a, b=b, m1=args.m1)
    a = 6.0 if args.a is None else args.a
    return TruthSpec(family="truncexp", a=a, m1=args.m1)


def cmd_simulate(args) -> int:
    truth = _truth_spec(args)
    exposure = ExposureSpec(m2=args.m2)
    draw = draw_singly if args.mode == SINGLE else draw_doubly
    data = draw(args.n, truth, exposure, args.seed)
    write_dataset_csv(args.out, data)
    if args.truth_out:
        with open(args.truth_out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["day", "fbar"])
            for day in range(1, truth.m1 + 1):
                writer.writerow([day, f"{true_fbar(truth, day):.12g}"])
    return 0


def cmd_fit(args) -> int:
    data = read_dataset_csv(args.data, args.mode)
    grid = candidate_grid(data, args.m1)
    config = SolverConfig(
        tol=args.tol, max_outer=args.max_outer, init_point=args.init_point
    )
    try:
        mass, trace = fit_npmle(data, grid, config)
    except NonConvergenceError as exc:
        if args.trace_out and exc.trace is not None:
            exc.trace.write(args.trace_out)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    fhat = cdf_from_mass(mass, grid)
    _write_estimate_csv(args.out, mass, fhat, grid)
    if args.trace_out:
        trace.write(args.trace_out)
    return 0


def _check_interval_args(args) -> None:
    if args.fisher_averaged:
        if args.mode != DOUBLE or args.method != "wald":
            raise ValueError(
                "--fisher-averaged applies only to --mode double --method wald"
            )
        if args.b < 1:
            raise ValueError("--fisher-averaged needs --b >= 1")
    if args.method == "wald" and args.level not in Z_QUANTILES:
        raise ValueError(f"wald intervals support levels {sorted(Z_QUANTILES)}")


def _interval_table(data, grid, mass, args, horizon, points, solver_config):
    if args.method == "wald":
        result = fisher_result(
            data,
            grid,
            mass,
            m1=horizon,
            averaging=args.b if args.fisher_averaged else None,
            solver_config=solver_config,
            seed=args.seed,
        )
        fhat = cdf_from_mass(mass, grid)
        return wald_intervals(fhat, result.variances, data.n, points, args.level)
    config = BootstrapConfig(b=args.b, seed=args.seed, points=tuple(points))
    return bootstrap_ci(data, grid, config, solver_config, args.level, mass=mass)


def cmd_ci(args) -> int:
    _check_interval_args(args)
    data = read_dataset_csv(args.data, args.mode)
    grid = candidate_grid(data, args.m1)
    horizon = args.m1 if args.m1 is not None else int(grid.points[-1])
    points = args.points if args.points is not None else list(range(1, horizon + 1))
    solver_config = SolverConfig(init_point=args.init_point)
    mass, _ = fit_npmle(data, grid, solver_config)
    table = _interval_table(data, grid, mass, args, horizon, points, solver_config)
    table.to_csv(args.out)
    return 0


def cmd_coverage(args) -> int:
    _check_interval_args(args)
    truth = _truth_spec(args)
    exposure = ExposureSpec(m2=args.m2)
    points = args.points if args.points is not None else list(range(1, truth.m1 + 1))
    target = {day: true_fbar(truth, day) for day in points}
    draw = draw_singly if args.mode == SINGLE else draw_doubly
    hits = {day: 0 for day in points}
    widths = {day: 0.0 for day in points}
    used = 0
    failures = 0
    for rep in range(args.reps):
        try:
            data = draw(args.n, truth, exposure, [args.seed, rep])
            grid = candidate_grid(data, truth.m1)
            solver_config = SolverConfig()
            mass, _ = fit_npmle(data, grid, solver_config)
            table = _interval_table(
                data, grid, mass, args, truth.m1, points, solver_config
            )
        except _FIT_FAILURES:
            failures += 1
            continue
        used += 1
        for row in table.rows:
            if row.lower <= target[row.day] <= row.upper:
                hits[row.day] += 1
            widths[row.day] += row.upper - row.lower
    if used == 0:
        raise DegenerateFitError("every coverage replicate failed")
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["day", "coverage", "mean_width", "failures"])
        for day in points:
            writer.writerow(
                [
                    day,
                    f"{hits[day] / used:.12g}",
                    f"{widths[day] / used:.12g}",
                    failures,
                ]
            )
    return 0


def _add_truth_args(sub, b_flag: str = "--b") -> None:
    # coverage passes b_flag="--truth-b" because there --b is the replicate
    # count; the dest is truth_b either way.
    sub.add_argument(
        "--model", choices=["weibull", "truncexp"], default="weibull",
        help="truth model (default weibull)",
    )
    sub.add_argument("--a", type=float, default=None, help="truth parameter a")
    sub.add_argument(
        b_flag, type=float, default=None, dest="truth_b",
        help="weibull truth parameter b",
    )
    sub.add_argument(
        "--m1", type=int, default=15, help="incubation support bound (default 15)"
    )
    sub.add_argument(
        "--m2", type=int, default=15,
        help="largest exposure window length (default 15)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="incutime",
        description="Day-resolution incubation time estimation from "
        "interval censored observations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="draw a synthetic dataset")
    p.add_argument("--mode", choices=[SINGLE, DOUBLE], required=True)
    p.add_argument("--n", type=int, required=True, help="number of records")
    _add_truth_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="dataset CSV path")
    p.add_argument(
        "--truth-out", default=None, help="optional truth curve CSV path"
    )
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="estimate the day-averaged distribution")
    p.add_argument("--mode", choices=[SINGLE, DOUBLE], required=True)
    p.add_argument("--data", required=True, help="dataset CSV path")
    p.add_argument(
        "--m1", type=int, default=None,
        help="incubation support bound (default: inferred from the data)",
    )
    p.add_argument("--init-point", type=int, default=None)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-outer", type=int, default=500)
    p.add_argument("--out", required=True, help="estimate CSV path")
    p.add_argument("--trace-out", default=None, help="iteration trace path")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("ci", help="fit and build confidence intervals")
    p.add_argument("--mode", choices=[SINGLE, DOUBLE], required=True)
    p.add_argument("--data", required=True, help="dataset CSV path")
    p.add_argument("--method", choices=["wald", "bootstrap"], required=True)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument(
        "--points", type=parse_points, default=None,
        help='evaluation days, "lo:hi" or "d1,d2,..." (default: 1..m1)',
    )
    p.add_argument("--m1", type=int, default=None)
    p.add_argument("--init-point", type=int, default=None)
    p.add_argument(
        "--b", type=int, default=1000,
        help="replicates for bootstrap or Fisher averaging (default 1000)",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--fisher-averaged", action="store_true",
        help="use the mean inverse information over --b resampled refits "
        "(double mode wald only)",
    )
    p.add_argument("--out", required=True, help="intervals CSV path")
    p.set_defaults(func=cmd_ci)

    p = sub.add_parser("coverage", help="Monte Carlo coverage study")
    p.add_argument("--mode", choices=[SINGLE, DOUBLE], required=True)
    p.add_argument("--method", choices=["wald", "bootstrap"], required=True)
    p.add_argument("--n", type=int, required=True, help="records per replicate")
    p.add_argument("--reps", type=int, required=True, help="number of replicates")
    _add_truth_args(p, b_flag="--truth-b")
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument(
        "--points", type=parse_points, default=None,
        help='evaluation days (default: 1..m1)',
    )
    p.add_argument(
        "--b", type=int, default=1000,
        help="replicates for bootstrap or Fisher averaging (default 1000)",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fisher-averaged", action="store_true")
    p.add_argument("--out", required=True, help="coverage CSV path")
    p.set_defaults(func=cmd_coverage)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; 3 is this tool's invalid-input code
        return 0 if exc.code == 0 else 3
    try:
        return args.func(args)
    except NonConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (
        InfeasibleRecordError,
        InfeasiblePointError,
        DegenerateFitError,
        BootstrapFailureError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (DatasetValidationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
