"""Immutable typed datasets: CSV ingest, cleaning, binning, subsetting.

Missing cells are tracked by an explicit per-cell boolean mask; whatever
sits in the value slot of a masked cell is unspecified and never read.
Cells whose raw CSV text matched a declared sentinel code keep a second
"sentinel" flag until clean_sentinels converts them to missing.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .errors import (
    BadCell,
    DegenerateBinning,
    DuplicateColumn,
    EmptyFile,
    MissingColumn,
    UncleanedSentinels,
    ValueOutOfRange,
)
from .schema import CATEGORICAL, CONTINUOUS, ColumnSpec, Schema


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ColumnData:
    """One column's storage: values, missing mask, raw-sentinel mask.

    values is float64 for continuous columns and int32 category codes for
    categorical ones (code = index into the schema's category tuple;
    -1 under a sentinel or missing flag).
    """

    values: np.ndarray
    missing: np.ndarray
    sentinel: np.ndarray

    def __post_init__(self):
        n = len(self.values)
        if len(self.missing) != n or len(self.sentinel) != n:
            raise ValueError("column masks must match value length")
        _frozen(self.values)
        _frozen(self.missing)
        _frozen(self.sentinel)


@dataclass(frozen=True)
class Provenance:
    source: str
    ingested_at: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds")
    )


@dataclass(frozen=True)
class Dataset:
    """Rectangular typed table; all operations return new datasets."""

    schema: Schema
    columns: dict[str, ColumnData]
    provenance: Provenance

    def __post_init__(self):
        lengths = {len(c.values) for c in self.columns.values()}
        if set(self.columns) != set(self.schema.names):
            raise MissingColumn(next(iter(set(self.schema.names) - set(self.columns)), "?"))
        if len(lengths) > 1:
            raise ValueError("dataset is not rectangular")

    @property
    def n_rows(self) -> int:
        if not self.columns:
            return 0
        return len(next(iter(self.columns.values())).values)

    def column(self, name: str) -> ColumnData:
        if name not in self.columns:
            raise MissingColumn(name)
        return self.columns[name]

    def has_sentinels(self) -> bool:
        return any(bool(c.sentinel.any()) for c in self.columns.values())

    def is_complete(self, names: list[str] | tuple[str, ...] | None = None) -> bool:
        names = self.schema.names if names is None else names
        return not any(bool(self.column(n).missing.any()) for n in names)

    def select(self, names: list[str] | tuple[str, ...]) -> "Dataset":
        """Column subset in the given order (shares the underlying arrays)."""
        sub = self.schema.subset(names)
        return Dataset(sub, {n: self.column(n) for n in names}, self.provenance)

    def take_rows(self, mask_or_index: np.ndarray) -> "Dataset":
        cols = {
            n: ColumnData(c.values[mask_or_index], c.missing[mask_or_index], c.sentinel[mask_or_index])
            for n, c in self.columns.items()
        }
        return Dataset(self.schema, cols, self.provenance)

    def categorical_labels(self, name: str) -> list[str | None]:
        """Decoded labels for a categorical column (None where missing)."""
        spec = self.schema.column(name)
        col = self.column(name)
        out: list[str | None] = []
        for code, miss in zip(col.values, col.missing):
            out.append(None if miss or code < 0 else spec.categories[int(code)])
        return out

    @classmethod
    def from_columns(
        cls,
        schema: Schema,
        data: dict[str, list],
        source: str = "memory",
    ) -> "Dataset":
        """Build a dataset from Python lists; None marks a missing cell."""
        cols: dict[str, ColumnData] = {}
        n = None
        for spec in schema:
            raw = data[spec.name]
            if n is None:
                n = len(raw)
            elif len(raw) != n:
                raise ValueError(f"column {spec.name!r} has {len(raw)} cells, expected {n}")
            missing = np.array([v is None for v in raw], dtype=bool)
            if spec.is_categorical:
                codes = np.full(n, -1, dtype=np.int32)
                lookup = {c: i for i, c in enumerate(spec.categories)}
                for i, v in enumerate(raw):
                    if v is None:
                        continue
                    if v not in lookup:
                        raise BadCell(i + 1, spec.name, str(v))
                    codes[i] = lookup[v]
                values: np.ndarray = codes
            else:
                values = np.array(
                    [np.nan if v is None else float(v) for v in raw], dtype=np.float64
                )
            cols[spec.name] = ColumnData(values, missing, np.zeros(n, dtype=bool))
        return cls(schema, cols, Provenance(source))


def validate_dataset(ds: Dataset) -> None:
    """Check value-domain invariants; sentinel-flagged cells are exempt."""
    for spec in ds.schema:
        col = ds.column(spec.name)
        live = ~(col.missing | col.sentinel)
        if spec.is_categorical:
            codes = col.values[live]
            if codes.size and (codes.min() < 0 or codes.max() >= len(spec.categories)):
                bad = int(np.flatnonzero(live)[np.argmax((codes < 0) | (codes >= len(spec.categories)))])
                raise BadCell(bad + 1, spec.name, str(col.values[bad]))
        elif spec.valid_range is not None:
            lo, hi = spec.valid_range
            vals = col.values[live]
            if vals.size and ((vals < lo).any() or (vals > hi).any()):
                idx = np.flatnonzero(live)[np.argmax((vals < lo) | (vals > hi))]
                raise ValueOutOfRange(spec.name, float(col.values[idx]))


def require_clean(ds: Dataset) -> None:
    if ds.has_sentinels():
        raise UncleanedSentinels(
            "dataset still carries raw sentinel cells; run clean_sentinels first"
        )


# --------------------------------------------------------------------------
# CSV ingest / export
# --------------------------------------------------------------------------

def load_csv(path, schema: Schema, source: str | None = None) -> Dataset:
    """Parse a headered CSV into a typed dataset.

    The header may list the schema columns in any order (extra columns are
    ignored).  An empty field is missing.  A cell whose raw text matches a
    declared sentinel code is kept, flagged, and left for clean_sentinels;
    any other unparseable cell is a hard error.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        text = fh.read()
    return load_csv_text(text, schema, source=source or str(path))


def load_csv_text(text: str, schema: Schema, source: str = "csv") -> Dataset:
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r]  # ignore blank lines
    if not rows:
        raise EmptyFile("no header row")
    header = rows[0]
    seen: dict[str, int] = {}
    for i, name in enumerate(header):
        if name in seen:
            raise DuplicateColumn(name)
        seen[name] = i
    for spec in schema:
        if spec.name not in seen:
            raise MissingColumn(spec.name)

    body = rows[1:]
    n = len(body)
    cols: dict[str, ColumnData] = {}
    for spec in schema:
        src = seen[spec.name]
        missing = np.zeros(n, dtype=bool)
        sentinel = np.zeros(n, dtype=bool)
        if spec.is_categorical:
            values = np.full(n, -1, dtype=np.int32)
            lookup = {c: i for i, c in enumerate(spec.categories)}
            for r, row in enumerate(body):
                if src >= len(row):
                    raise BadCell(r + 1, spec.name, "<short row>")
                raw = row[src]
                if raw == "":
                    missing[r] = True
                elif raw in spec.sentinel_codes:
                    sentinel[r] = True
                    values[r] = lookup.get(raw, -1)
                elif raw in lookup:
                    values[r] = lookup[raw]
                else:
                    raise BadCell(r + 1, spec.name, raw)
        else:
            values = np.full(n, np.nan, dtype=np.float64)
            for r, row in enumerate(body):
                if src >= len(row):
                    raise BadCell(r + 1, spec.name, "<short row>")
                raw = row[src]
                if raw == "":
                    missing[r] = True
                    continue
                is_sentinel = raw in spec.sentinel_codes
                try:
                    values[r] = float(raw)
                except ValueError:
                    if not is_sentinel:
                        raise BadCell(r + 1, spec.name, raw) from None
                if is_sentinel:
                    sentinel[r] = True
        cols[spec.name] = ColumnData(values, missing, sentinel)
    return Dataset(schema, cols, Provenance(source))


def _csv_num(v: float) -> str:
    """Shortest text that parses back to exactly ``v`` (integers stay bare)."""
    f = float(v)
    if f.is_integer() and abs(f) <= 2**53:
        return str(int(f))
    return repr(f)


def write_csv(ds: Dataset, path) -> None:
    """Export in schema order; missing cells become a literal empty field."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(ds.schema.names)
        decoded = {}
        for spec in ds.schema:
            col = ds.column(spec.name)
            if spec.is_categorical:
                decoded[spec.name] = ds.categorical_labels(spec.name)
            else:
                decoded[spec.name] = [
                    None if m else _csv_num(v) for v, m in zip(col.values, col.missing)
                ]
        for r in range(ds.n_rows):
            w.writerow(["" if decoded[n][r] is None else decoded[n][r] for n in ds.schema.names])


# --------------------------------------------------------------------------
# Cleaning
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CleanReport:
    """Per-column tallies of cells converted to missing, split by reason."""

    sentinel: dict[str, int]
    out_of_range: dict[str, int]
    rows_touched: int

    @property
    def total_cells(self) -> int:
        return sum(self.sentinel.values()) + sum(self.out_of_range.values())

    def to_dict(self) -> dict:
        return {
            "sentinel": dict(self.sentinel),
            "out_of_range": dict(self.out_of_range),
            "total_cells": self.total_cells,
            "rows_touched": self.rows_touched,
        }


def clean_sentinels(ds: Dataset) -> tuple[Dataset, CleanReport]:
    """Convert sentinel-coded and out-of-range cells to missing.

    Sentinel matching was decided against the raw cell at ingest time; a
    cell counts under one reason only (sentinel takes precedence).
    Idempotent: a second pass reports zero conversions.
    """
    sentinel_counts: dict[str, int] = {}
    range_counts: dict[str, int] = {}
    touched = np.zeros(ds.n_rows, dtype=bool)
    new_cols: dict[str, ColumnData] = {}
    for spec in ds.schema:
        col = ds.column(spec.name)
        to_sentinel = col.sentinel & ~col.missing
        to_range = np.zeros(ds.n_rows, dtype=bool)
        if not spec.is_categorical and spec.valid_range is not None:
            lo, hi = spec.valid_range
            live = ~(col.missing | col.sentinel)
            vals = col.values
            with np.errstate(invalid="ignore"):
                to_range = live & ((vals < lo) | (vals > hi))
        n_sent = int(to_sentinel.sum())
        n_range = int(to_range.sum())
        if n_sent:
            sentinel_counts[spec.name] = n_sent
        if n_range:
            range_counts[spec.name] = n_range
        converted = to_sentinel | to_range
        touched |= converted
        new_cols[spec.name] = ColumnData(
            col.values,
            col.missing | converted,
            np.zeros(ds.n_rows, dtype=bool),
        )
    report = CleanReport(sentinel_counts, range_counts, int(touched.sum()))
    return Dataset(ds.schema, new_cols, ds.provenance), report


# --------------------------------------------------------------------------
# Quartile binning
# --------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), "g")


def quartile_bin(ds: Dataset, column: str, labels: list[str] | None = None) -> Dataset:
    """Replace a continuous column by 4 quartile categories.

    Cut points are the 25/50/75 percentiles of the non-missing values
    under the linear-interpolation ("type 7") convention.  Intervals are
    [min,q1], (q1,q2], (q2,q3], (q3,max]: ties at a cut point fall to the
    lower bin.  Missing cells stay missing.
    """
    require_clean(ds)
    spec = ds.schema.column(column)
    if spec.is_categorical:
        raise DegenerateBinning(f"column {column!r} is not continuous")
    col = ds.column(column)
    obs = col.values[~col.missing]
    if obs.size < 4:
        raise DegenerateBinning(f"column {column!r}: fewer than 4 non-missing values")
    if np.unique(obs).size < 4:
        raise DegenerateBinning(f"column {column!r}: fewer than 4 distinct values")
    q1, q2, q3 = np.quantile(obs, [0.25, 0.5, 0.75], method="linear")
    if not (q1 < q2 < q3):
        raise DegenerateBinning(f"column {column!r}: quartile cut points coincide")
    lo, hi = float(obs.min()), float(obs.max())
    if labels is None:
        labels = [
            f"[{_fmt(lo)}-{_fmt(q1)}]",
            f"({_fmt(q1)}-{_fmt(q2)}]",
            f"({_fmt(q2)}-{_fmt(q3)}]",
            f"({_fmt(q3)}-{_fmt(hi)}]",
        ]
    if len(labels) != 4 or len(set(labels)) != 4:
        raise DegenerateBinning("need exactly 4 distinct bin labels")

    codes = np.full(ds.n_rows, -1, dtype=np.int32)
    live = ~col.missing
    v = col.values
    with np.errstate(invalid="ignore"):
        codes[live] = np.select(
            [v[live] <= q1, v[live] <= q2, v[live] <= q3], [0, 1, 2], default=3
        ).astype(np.int32)
    new_spec = ColumnSpec(
        name=column,
        kind=CATEGORICAL,
        categories=tuple(labels),
        sentinel_codes=spec.sentinel_codes,
    )
    cols = dict(ds.columns)
    cols[column] = ColumnData(codes, col.missing.copy(), np.zeros(ds.n_rows, dtype=bool))
    return Dataset(ds.schema.replace(column, new_spec), cols, ds.provenance)


# --------------------------------------------------------------------------
# Complete cases
# --------------------------------------------------------------------------

def complete_cases(ds: Dataset, variables: list[str] | tuple[str, ...]) -> tuple[Dataset, int]:
    """Drop rows with any missing cell among ``variables``; keep row order."""
    keep = np.ones(ds.n_rows, dtype=bool)
    for name in variables:
        keep &= ~ds.column(name).missing
    excluded = int(ds.n_rows - keep.sum())
    return ds.take_rows(keep), excluded
