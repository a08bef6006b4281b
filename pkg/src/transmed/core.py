"""Observed-data model shared by every other module.

A unit contributes O = (delta, s, w, a, z, m, y, pi): survey-inclusion
indicator, population indicator (1 = source, 0 = target), pre-treatment
covariates, binary treatment, binary intermediate variable, mediator
vector, outcome (observed only in the source population), and the
sampling probability behind the survey weights.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np


class DatasetError(ValueError):
    """Base class for dataset validation failures."""


class SchemaError(DatasetError):
    """Input file does not match the expected column layout."""


class MissingOutcome(DatasetError):
    """A source-population row is missing its outcome."""


class NonBinaryCode(DatasetError):
    """delta, s, a or z holds a value outside {0, 1}."""


class DimensionMismatch(DatasetError):
    """Rows disagree on covariate or mediator dimension."""


class EmptyArm(DatasetError):
    """One of the two populations has no rows."""


class DegenerateBounds(DatasetError):
    """Outcome bounds collapse to a point, so no unit rescaling exists."""


class MissingPi(DatasetError):
    """Survey weights were requested but a sampling probability is absent."""


@dataclass(frozen=True)
class EffectSpec:
    """Treatment levels (a_prime, a_star) defining one corner theta(a', a*).

    a_prime is the level the outcome regression and intermediate-variable
    distribution are evaluated at; a_star is the level whose mediator
    distribution is transported.  a_prime == a_star is allowed and yields
    the theta(a, a) corners needed by the effect contrasts.
    """

    a_prime: int
    a_star: int

    def __post_init__(self) -> None:
        if self.a_prime not in (0, 1) or self.a_star not in (0, 1):
            raise ValueError("treatment levels must be 0 or 1")


@dataclass(frozen=True)
class Observation:
    """A single row; y and pi are None when absent."""

    delta: int
    s: int
    a: int
    z: int
    w: tuple[float, ...]
    m: tuple[float, ...]
    y: float | None = None
    pi: float | None = None


@dataclass(frozen=True)
class Dataset:
    """Column-major container for a sample of observations.

    Parameters
    ----------
    delta, s, a, z : int arrays of shape (n,)
    w : float array of shape (n, p), pre-treatment covariates
    m : float array of shape (n, q), mediators
    y : float array of shape (n,); NaN encodes an absent outcome at the
        storage level, surfaced as None through `rows`.
    pi : float array of shape (n,); NaN encodes an absent sampling
        probability.
    outcome_bounds : (y_min, y_max) or None to derive bounds from the
        observed outcomes.
    """

    delta: np.ndarray
    s: np.ndarray
    a: np.ndarray
    z: np.ndarray
    w: np.ndarray
    m: np.ndarray
    y: np.ndarray
    pi: np.ndarray
    outcome_bounds: tuple[float, float] | None = None

    @property
    def n(self) -> int:
        return self.s.shape[0]

    @property
    def n_w(self) -> int:
        return self.w.shape[1]

    @property
    def n_m(self) -> int:
        return self.m.shape[1]

    @staticmethod
    def from_rows(rows: Sequence[Observation],
                  outcome_bounds: tuple[float, float] | None = None) -> "Dataset":
        """Assemble a Dataset from Observation records."""
        if not rows:
            raise EmptyArm("dataset has no rows")
        p = len(rows[0].w)
        q = len(rows[0].m)
        for i, r in enumerate(rows):
            if len(r.w) != p or len(r.m) != q:
                raise DimensionMismatch(
                    f"row {i}: expected {p} covariates and {q} mediators, "
                    f"got {len(r.w)} and {len(r.m)}")
        return Dataset(
            delta=np.array([r.delta for r in rows], dtype=np.int64),
            s=np.array([r.s for r in rows], dtype=np.int64),
            a=np.array([r.a for r in rows], dtype=np.int64),
            z=np.array([r.z for r in rows], dtype=np.int64),
            w=np.array([r.w for r in rows], dtype=np.float64).reshape(len(rows), p),
            m=np.array([r.m for r in rows], dtype=np.float64).reshape(len(rows), q),
            y=np.array([math.nan if r.y is None else r.y for r in rows], dtype=np.float64),
            pi=np.array([math.nan if r.pi is None else r.pi for r in rows], dtype=np.float64),
            outcome_bounds=outcome_bounds,
        )

    def rows(self) -> Iterator[Observation]:
        """Iterate observations, mapping stored NaN back to None."""
        for i in range(self.n):
            yield self.row(i)

    def row(self, i: int) -> Observation:
        y = self.y[i]
        pi = self.pi[i]
        return Observation(
            delta=int(self.delta[i]), s=int(self.s[i]),
            a=int(self.a[i]), z=int(self.z[i]),
            w=tuple(self.w[i]), m=tuple(self.m[i]),
            y=None if math.isnan(y) else float(y),
            pi=None if math.isnan(pi) else float(pi),
        )

    def subset(self, index: np.ndarray) -> "Dataset":
        """Row-subset by integer or boolean index, keeping bounds."""
        return Dataset(
            delta=self.delta[index], s=self.s[index], a=self.a[index],
            z=self.z[index], w=self.w[index], m=self.m[index],
            y=self.y[index], pi=self.pi[index],
            outcome_bounds=self.outcome_bounds,
        )

    def effective_bounds(self) -> tuple[float, float]:
        """Outcome bounds: the declared pair, else observed min/max."""
        if self.outcome_bounds is not None:
            return self.outcome_bounds
        observed = self.y[~np.isnan(self.y)]
        if observed.size == 0:
            raise DegenerateBounds("no observed outcomes to derive bounds from")
        return float(observed.min()), float(observed.max())


def validate_dataset(data: Dataset) -> Dataset:
    """Check the invariants of the observed-data model.

    Parameters
    ----------
    data : Dataset

    Returns
    -------
    Dataset
        The same object, unchanged, if every invariant holds.

    Raises
    ------
    NonBinaryCode
        A delta, s, a or z entry lies outside {0, 1}.
    MissingOutcome
        A row with s = 1 and delta = 1 has no outcome.
    DimensionMismatch
        Array shapes are inconsistent across columns.
    EmptyArm
        All rows share the same population indicator.
    """
    n = data.n
    for name in ("delta", "s", "a", "z", "y", "pi"):
        col = getattr(data, name)
        if col.shape != (n,):
            raise DimensionMismatch(f"column {name} has shape {col.shape}, expected ({n},)")
    if data.w.ndim != 2 or data.w.shape[0] != n:
        raise DimensionMismatch(f"covariate block has shape {data.w.shape}")
    if data.m.ndim != 2 or data.m.shape[0] != n:
        raise DimensionMismatch(f"mediator block has shape {data.m.shape}")
    for name in ("delta", "s", "a", "z"):
        col = getattr(data, name)
        bad = np.nonzero((col != 0) & (col != 1))[0]
        if bad.size:
            raise NonBinaryCode(f"column {name} is not 0/1 at row {int(bad[0])}")
    missing = np.nonzero((data.s == 1) & (data.delta == 1) & np.isnan(data.y))[0]
    if missing.size:
        raise MissingOutcome(f"source-population row {int(missing[0])} has no outcome")
    if not (data.s == 0).any():
        raise EmptyArm("no target-population rows (s=0)")
    if not (data.s == 1).any():
        raise EmptyArm("no source-population rows (s=1)")
    return data


@dataclass(frozen=True)
class OutcomeScale:
    """Affine map between the original outcome range and [0, 1]."""

    y_min: float
    y_max: float

    @property
    def width(self) -> float:
        return self.y_max - self.y_min

    def to_unit(self, y: np.ndarray | float) -> np.ndarray | float:
        return (y - self.y_min) / self.width

    def from_unit(self, y: np.ndarray | float) -> np.ndarray | float:
        return self.y_min + self.width * y


def scale_outcome(data: Dataset) -> tuple[Dataset, OutcomeScale]:
    """Map outcomes onto [0, 1] and return the inverse map.

    Point estimates produced on the unit scale map back through
    `OutcomeScale.from_unit`; standard errors and contrast estimates
    scale by `OutcomeScale.width`.

    Raises
    ------
    DegenerateBounds
        The outcome bounds coincide, or are not finite.
    """
    y_min, y_max = data.effective_bounds()
    if not (math.isfinite(y_min) and math.isfinite(y_max)):
        raise DegenerateBounds(f"outcome bounds ({y_min}, {y_max}) are not finite")
    if y_max <= y_min:
        raise DegenerateBounds(f"outcome bounds ({y_min}, {y_max}) have no width")
    scale = OutcomeScale(y_min=y_min, y_max=y_max)
    scaled = Dataset(
        delta=data.delta, s=data.s, a=data.a, z=data.z,
        w=data.w, m=data.m,
        y=np.asarray(scale.to_unit(data.y), dtype=np.float64),
        pi=data.pi,
        outcome_bounds=(0.0, 1.0),
    )
    return scaled, scale


CSV_FIXED_COLUMNS = ("delta", "s", "a", "z", "y", "pi")


def _parse_cell(text: str, column: str, row: int) -> float:
    if text.strip() == "":
        return math.nan
    try:
        return float(text)
    except ValueError as exc:
        raise SchemaError(f"row {row}: column {column} has non-numeric value {text!r}") from exc


def read_csv(path: str, outcome_bounds: tuple[float, float] | None = None) -> Dataset:
    """Read a dataset from a delimited file.

    The header must start with ``delta,s,a,z,y,pi`` followed by covariate
    columns ``w1..wp`` and mediator columns ``m1..mq``.  Empty cells in
    the y and pi columns mean the value is absent.
    """
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError("input file is empty") from None
        header = [h.strip() for h in header]
        for name in CSV_FIXED_COLUMNS:
            if name not in header:
                raise SchemaError(f"missing required column {name!r}")
        if tuple(header[:6]) != CSV_FIXED_COLUMNS:
            raise SchemaError(
                f"leading columns must be {','.join(CSV_FIXED_COLUMNS)}, got {','.join(header[:6])}")
        w_names = [h for h in header[6:] if h.startswith("w")]
        m_names = [h for h in header[6:] if h.startswith("m")]
        if len(w_names) + len(m_names) != len(header) - 6:
            extra = [h for h in header[6:] if not h.startswith(("w", "m"))]
            raise SchemaError(f"unrecognized column {extra[0]!r}")
        if not w_names:
            raise SchemaError("missing required column 'w1'")
        if not m_names:
            raise SchemaError("missing required column 'm1'")
        expected_w = [f"w{i}" for i in range(1, len(w_names) + 1)]
        expected_m = [f"m{i}" for i in range(1, len(m_names) + 1)]
        if w_names != expected_w or m_names != expected_m or header[6:] != expected_w + expected_m:
            raise SchemaError(
                f"trailing columns must be {','.join(expected_w + expected_m)}")
        records = []
        for row_index, cells in enumerate(reader):
            if not cells:
                continue
            if len(cells) != len(header):
                raise SchemaError(
                    f"row {row_index}: expected {len(header)} cells, got {len(cells)}")
            values = [_parse_cell(c, header[j], row_index) for j, c in enumerate(cells)]
            records.append(values)
    if not records:
        raise SchemaError("input file has a header but no rows")
    table = np.asarray(records, dtype=np.float64)
    p = len(w_names)
    q = len(m_names)

    def int_column(j: int, name: str) -> np.ndarray:
        col = table[:, j]
        bad = np.nonzero(np.isnan(col))[0]
        if bad.size:
            raise SchemaError(f"row {int(bad[0])}: column {name} is empty")
        return col.astype(np.int64)

    pi = table[:, 5]
    out_of_range = np.nonzero(~np.isnan(pi) & ((pi <= 0) | (pi > 1)))[0]
    if out_of_range.size:
        raise SchemaError(
            f"row {int(out_of_range[0])}: pi must lie in (0, 1]")
    return Dataset(
        delta=int_column(0, "delta"), s=int_column(1, "s"),
        a=int_column(2, "a"), z=int_column(3, "z"),
        w=table[:, 6:6 + p].copy(), m=table[:, 6 + p:6 + p + q].copy(),
        y=table[:, 4].copy(), pi=pi.copy(),
        outcome_bounds=outcome_bounds,
    )


def write_csv(path: str, data: Dataset) -> None:
    """Write a dataset in the layout `read_csv` expects."""
    header = list(CSV_FIXED_COLUMNS)
    header += [f"w{i}" for i in range(1, data.n_w + 1)]
    header += [f"m{i}" for i in range(1, data.n_m + 1)]

    def fmt(value: float) -> str:
        return "" if math.isnan(value) else repr(float(value))

    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for i in range(data.n):
            row = [int(data.delta[i]), int(data.s[i]), int(data.a[i]), int(data.z[i]),
                   fmt(data.y[i]), fmt(data.pi[i])]
            row += [repr(float(v)) for v in data.w[i]]
            row += [repr(float(v)) for v in data.m[i]]
            writer.writerow(row)
