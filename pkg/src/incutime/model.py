"""Core data types for day-resolution incubation time estimation.

Observations pair an exposure window length ``e`` (days) with either a single
symptom onset day ``s`` or an onset window ``(s_l, s_r]``.  Estimates are
discrete probability masses on integer days; their partial sums form the
day-averaged distribution function reported to users.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DatasetValidationError

logger = logging.getLogger(__name__)

SINGLE = "single"
DOUBLE = "double"


@dataclass(frozen=True)
class SinglyObs:
    """One singly censored record: exposure length and onset day."""

    e: int
    s: int


@dataclass(frozen=True)
class DoublyObs:
    """One doubly censored record: exposure length and onset window (s_l, s_r]."""

    e: int
    s_l: int
    s_r: int


@dataclass(frozen=True)
class Dataset:
    """A homogeneous collection of observations, stored column-wise.

    Column storage keeps resampling and weight construction vectorized; the
    ``records`` property exposes the row view.
    """

    mode: str
    e: np.ndarray
    s: np.ndarray | None = None
    s_l: np.ndarray | None = None
    s_r: np.ndarray | None = None

    def __post_init__(self):
        if self.mode not in (SINGLE, DOUBLE):
            raise DatasetValidationError(f"unknown mode {self.mode!r}")
        object.__setattr__(self, "e", np.asarray(self.e))
        if self.mode == SINGLE:
            if self.s is None:
                raise DatasetValidationError("single mode requires onset days s")
            object.__setattr__(self, "s", np.asarray(self.s))
            if self.s.shape != self.e.shape:
                raise DatasetValidationError("e and s must have equal length")
        else:
            if self.s_l is None or self.s_r is None:
                raise DatasetValidationError("double mode requires s_l and s_r")
            object.__setattr__(self, "s_l", np.asarray(self.s_l))
            object.__setattr__(self, "s_r", np.asarray(self.s_r))
            if self.s_l.shape != self.e.shape or self.s_r.shape != self.e.shape:
                raise DatasetValidationError("e, s_l and s_r must have equal length")

    @classmethod
    def singly(cls, e, s) -> "Dataset":
        return cls(mode=SINGLE, e=e, s=s)

    @classmethod
    def doubly(cls, e, s_l, s_r) -> "Dataset":
        return cls(mode=DOUBLE, e=e, s_l=s_l, s_r=s_r)

    @classmethod
    def from_records(cls, records) -> "Dataset":
        records = list(records)
        if records and isinstance(records[0], DoublyObs):
            return cls.doubly(
                [r.e for r in records],
                [r.s_l for r in records],
                [r.s_r for r in records],
            )
        return cls.singly([r.e for r in records], [r.s for r in records])

    @property
    def n(self) -> int:
        return int(self.e.shape[0])

    def __len__(self) -> int:
        return self.n

    @property
    def records(self) -> list:
        if self.mode == SINGLE:
            return [SinglyObs(int(a), int(b)) for a, b in zip(self.e, self.s)]
        return [
            DoublyObs(int(a), int(b), int(c))
            for a, b, c in zip(self.e, self.s_l, self.s_r)
        ]

    def take(self, indices) -> "Dataset":
        """Row subset (used by resampling); preserves mode."""
        idx = np.asarray(indices)
        if self.mode == SINGLE:
            return Dataset.singly(self.e[idx], self.s[idx])
        return Dataset.doubly(self.e[idx], self.s_l[idx], self.s_r[idx])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset) or self.mode != other.mode:
            return NotImplemented if not isinstance(other, Dataset) else False
        if self.mode == SINGLE:
            return np.array_equal(self.e, other.e) and np.array_equal(self.s, other.s)
        return (
            np.array_equal(self.e, other.e)
            and np.array_equal(self.s_l, other.s_l)
            and np.array_equal(self.s_r, other.s_r)
        )


def _as_int_column(values: np.ndarray, name: str) -> np.ndarray:
    """Coerce a column to int64, rejecting non-integral entries by record."""
    arr = np.asarray(values)
    if arr.dtype.kind not in "iu":
        rounded = np.floor(arr)
        bad = np.flatnonzero(arr != rounded)
        if bad.size:
            raise DatasetValidationError(
                f"{name} = {arr[bad[0]]} is not an integer", record_index=int(bad[0])
            )
        arr = rounded
    return arr.astype(np.int64)


def validate_dataset(data: Dataset) -> Dataset:
    """Check and normalize raw records.

    Single mode requires ``e >= 1`` and ``s >= 1``; records reporting onset
    before the exposure window closed (``s < e``) are normalized by clamping
    the window to ``e = s``, so the record means "exposed throughout (0, s]".
    Double mode requires ``e >= 1``, ``s_r >= 1`` and ``s_l < s_r``; negative
    ``s_l`` is clipped to 0.  Validation is idempotent.
    """
    if data.n == 0:
        raise DatasetValidationError("empty dataset")
    e = _as_int_column(data.e, "e")
    bad = np.flatnonzero(e < 1)
    if bad.size:
        raise DatasetValidationError(
            f"exposure length e = {e[bad[0]]} must be >= 1", record_index=int(bad[0])
        )
    if data.mode == SINGLE:
        s = _as_int_column(data.s, "s")
        bad = np.flatnonzero(s < 1)
        if bad.size:
            raise DatasetValidationError(
                f"onset day s = {s[bad[0]]} must be >= 1", record_index=int(bad[0])
            )
        clamped = np.flatnonzero(s < e)
        if clamped.size:
            for i in clamped:
                logger.debug(
                    "record %d: onset day %d precedes end of exposure window %d; "
                    "clamping e to %d",
                    i, s[i], e[i], s[i],
                )
            logger.info("clamped exposure window on %d record(s)", clamped.size)
            e = np.minimum(e, s)
        return Dataset.singly(e, s)

    s_l = _as_int_column(data.s_l, "s_l")
    s_r = _as_int_column(data.s_r, "s_r")
    bad = np.flatnonzero(s_r < 1)
    if bad.size:
        raise DatasetValidationError(
            f"right onset bound s_r = {s_r[bad[0]]} must be >= 1",
            record_index=int(bad[0]),
        )
    bad = np.flatnonzero(s_l >= s_r)
    if bad.size:
        raise DatasetValidationError(
            f"onset window requires s_l < s_r, got ({s_l[bad[0]]}, {s_r[bad[0]]})",
            record_index=int(bad[0]),
        )
    s_l = np.maximum(s_l, 0)
    return Dataset.doubly(e, s_l, s_r)


@dataclass(frozen=True)
class Grid:
    """Candidate mass point days, strictly increasing positive integers."""

    points: np.ndarray
    m1: int | None = None  # upper bound of the incubation support, if known
    m2: int | None = None  # largest exposure window length, if known

    def __post_init__(self):
        pts = _as_int_column(np.asarray(self.points), "grid point")
        if pts.size == 0:
            raise ValueError("grid must contain at least one point")
        if np.any(np.diff(pts) <= 0):
            raise ValueError("grid points must be strictly increasing")
        if pts[0] < 1:
            raise ValueError("grid points must be positive days")
        object.__setattr__(self, "points", pts)

    @property
    def size(self) -> int:
        return int(self.points.size)

    def index_of(self, day: int) -> int:
        pos = int(np.searchsorted(self.points, day))
        if pos == self.size or self.points[pos] != day:
            raise ValueError(f"day {day} is not a grid point")
        return pos


def candidate_grid(data: Dataset, m1: int | None = None) -> Grid:
    """Default mass point grid for a dataset.

    Without ``m1`` the grid runs over all days up to the largest observed
    onset (right onset bound in double mode); with ``m1`` it runs up to
    ``m1 + max(e)``, covering every day the model can place mass on.
    """
    max_e = int(data.e.max())
    if m1 is None:
        top = int(data.s.max()) if data.mode == SINGLE else int(data.s_r.max())
    else:
        top = int(m1) + max_e
    return Grid(points=np.arange(1, top + 1), m1=m1, m2=max_e)


@dataclass(frozen=True)
class MassFunction:
    """Discrete probability masses on integer days.

    Zero-mass points are pruned on construction; the remaining masses are
    renormalized only when their sum drifts from 1 by more than 1e-12.
    """

    support: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        support = _as_int_column(np.asarray(self.support), "support day")
        probs = np.asarray(self.probs, dtype=float)
        if support.shape != probs.shape:
            raise ValueError("support and probs must have equal length")
        keep = probs > 0.0
        support, probs = support[keep], probs[keep]
        if support.size == 0:
            raise ValueError("mass function needs at least one positive mass")
        if np.any(np.diff(support) <= 0):
            order = np.argsort(support)
            support, probs = support[order], probs[order]
            if np.any(np.diff(support) <= 0):
                raise ValueError("support days must be distinct")
        total = probs.sum()
        if abs(total - 1.0) > 1e-12:
            probs = probs / total
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)

    @property
    def size(self) -> int:
        return int(self.support.size)

    def mass_at(self, day: int) -> float:
        pos = np.searchsorted(self.support, day)
        if pos < self.support.size and self.support[pos] == day:
            return float(self.probs[pos])
        return 0.0

    def as_vector(self, grid: Grid) -> np.ndarray:
        """Masses embedded into a full grid vector."""
        if not np.isin(self.support, grid.points).all():
            raise ValueError("mass support is not contained in the grid")
        vec = np.zeros(grid.size)
        vec[np.searchsorted(grid.points, self.support)] = self.probs
        return vec


@dataclass(frozen=True)
class DayCdf:
    """Day-averaged distribution function tabulated at days 1..M."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.size == 0:
            raise ValueError("day CDF needs at least one value")
        if np.any(np.diff(vals) < -1e-9):
            raise ValueError("day CDF must be nondecreasing")
        if vals[0] < -1e-9 or vals[-1] > 1.0 + 1e-9:
            raise ValueError("day CDF values must lie in [0, 1]")
        object.__setattr__(self, "values", vals)

    @property
    def last_day(self) -> int:
        return int(self.values.size)

    def value(self, day: int) -> float:
        return float(self.value_at(np.asarray(day)))

    def value_at(self, days) -> np.ndarray:
        """Vectorized lookup; 0 before day 1 and 1 beyond the last day."""
        days = np.asarray(days)
        idx = np.clip(days - 1, 0, self.values.size - 1)
        out = self.values[idx]
        return np.where(days <= 0, 0.0, np.where(days > self.values.size, 1.0, out))


def cdf_from_mass(mass: MassFunction, grid: Grid) -> DayCdf:
    """Partial sums of the masses over the grid days 1..max(grid)."""
    top = int(grid.points[-1])
    if int(mass.support[-1]) > top:
        raise ValueError("mass support extends beyond the grid")
    increments = np.zeros(top)
    increments[mass.support - 1] = mass.probs
    return DayCdf(values=np.minimum(np.cumsum(increments), 1.0))
