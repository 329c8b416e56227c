"""Ordered inclusion/exclusion criteria, auto-generated flowcharts, and the
complete-vs-incomplete population comparison."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset, complete_cases, require_clean
from .errors import CriterionError, DegenerateVariance, UndersizedSample
from .stats import chi_square_independence, welch_t_test

INCLUSION = "inclusion"
EXCLUSION = "exclusion"

_COMPARE_OPS = {"<", "<=", ">", ">="}


@dataclass(frozen=True)
class Equals:
    value: str


@dataclass(frozen=True)
class InSet:
    values: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "values", frozenset(self.values))


@dataclass(frozen=True)
class Compare:
    op: str
    threshold: float

    def __post_init__(self):
        if self.op not in _COMPARE_OPS:
            raise CriterionError(f"unknown comparison operator {self.op!r}")


@dataclass(frozen=True)
class NonMissing:
    pass


Predicate = Equals | InSet | Compare | NonMissing


@dataclass(frozen=True)
class Criterion:
    label: str
    column: str
    predicate: Predicate
    kind: str  # inclusion | exclusion

    def __post_init__(self):
        if self.kind not in (INCLUSION, EXCLUSION):
            raise CriterionError(f"criterion kind must be inclusion or exclusion, got {self.kind!r}")

    def to_dict(self) -> dict:
        p = self.predicate
        if isinstance(p, Equals):
            pd = {"type": "equals", "value": p.value}
        elif isinstance(p, InSet):
            pd = {"type": "in_set", "values": sorted(p.values)}
        elif isinstance(p, Compare):
            pd = {"type": "compare", "op": p.op, "threshold": p.threshold}
        else:
            pd = {"type": "non_missing"}
        return {"label": self.label, "column": self.column, "kind": self.kind, "predicate": pd}

    @classmethod
    def from_dict(cls, d: dict) -> "Criterion":
        p = d["predicate"]
        t = p.get("type")
        if t == "equals":
            pred: Predicate = Equals(p["value"])
        elif t == "in_set":
            pred = InSet(frozenset(p["values"]))
        elif t == "compare":
            pred = Compare(p["op"], float(p["threshold"]))
        elif t == "non_missing":
            pred = NonMissing()
        else:
            raise CriterionError(f"unknown predicate type {t!r}")
        return cls(label=d["label"], column=d["column"], predicate=pred, kind=d["kind"])


@dataclass(frozen=True)
class FlowStep:
    label: str
    n_before: int
    n_excluded: int
    n_after: int


@dataclass(frozen=True)
class Flowchart:
    """Staged account of cohort selection; counts are conserved per step."""

    initial_n: int
    steps: tuple[FlowStep, ...]

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        n = self.initial_n
        for s in self.steps:
            if s.n_before != n or s.n_excluded < 0 or s.n_after != s.n_before - s.n_excluded:
                raise ValueError(f"flowchart step {s.label!r} breaks count conservation")
            n = s.n_after

    @property
    def final_n(self) -> int:
        return self.steps[-1].n_after if self.steps else self.initial_n

    def to_dict(self) -> dict:
        return {
            "initial_n": self.initial_n,
            "final_n": self.final_n,
            "steps": [
                {
                    "label": s.label,
                    "n_before": s.n_before,
                    "n_excluded": s.n_excluded,
                    "n_after": s.n_after,
                }
                for s in self.steps
            ],
        }

    def to_text(self) -> str:
        """Plain line-diagram rendering for terminals and logs."""
        lines = [f"  {self.initial_n}  assessed"]
        for s in self.steps:
            lines.append(f"   |-- {s.n_excluded} excluded: {s.label}")
            lines.append(f"  {s.n_after}")
        lines[-1] = f"  {self.final_n}  included"
        return "\n".join(lines)


def _check_criterion(ds: Dataset, crit: Criterion) -> None:
    spec = ds.schema.column(crit.column)  # raises MissingColumn
    p = crit.predicate
    if isinstance(p, (Equals, InSet)) and not spec.is_categorical:
        raise CriterionError(
            f"criterion {crit.label!r}: equals/in_set needs a categorical column"
        )
    if isinstance(p, Compare) and spec.is_categorical:
        raise CriterionError(f"criterion {crit.label!r}: compare needs a continuous column")
    if isinstance(p, (Equals, InSet)):
        values = {p.value} if isinstance(p, Equals) else p.values
        unknown = values - set(spec.categories)
        if unknown:
            raise CriterionError(
                f"criterion {crit.label!r}: {sorted(unknown)} not in categories of {crit.column!r}"
            )


def _matches(ds: Dataset, crit: Criterion) -> np.ndarray:
    """Rows whose observed value satisfies the predicate (missing never matches)."""
    spec = ds.schema.column(crit.column)
    col = ds.column(crit.column)
    live = ~col.missing
    p = crit.predicate
    if isinstance(p, NonMissing):
        return live.copy()
    out = np.zeros(ds.n_rows, dtype=bool)
    if isinstance(p, Equals):
        out[live] = col.values[live] == spec.categories.index(p.value)
    elif isinstance(p, InSet):
        codes = {spec.categories.index(v) for v in p.values}
        out[live] = np.isin(col.values[live], sorted(codes))
    else:
        v = col.values[live]
        if p.op == "<":
            out[live] = v < p.threshold
        elif p.op == "<=":
            out[live] = v <= p.threshold
        elif p.op == ">":
            out[live] = v > p.threshold
        else:
            out[live] = v >= p.threshold
    return out


def apply_criteria(
    ds: Dataset,
    criteria: list[Criterion] | tuple[Criterion, ...],
    analysis_vars: list[str] | tuple[str, ...],
) -> tuple[Dataset, Flowchart]:
    """Apply criteria in order, then drop rows incomplete on analysis_vars.

    A criterion never eliminates a row on the strength of a missing cell:
    such rows survive to the final, always-present "incomplete data" step,
    which keeps the missing-data exclusion visible in the flowchart.
    """
    require_clean(ds)
    for crit in criteria:
        _check_criterion(ds, crit)
    for v in analysis_vars:
        ds.schema.column(v)

    current = ds
    steps: list[FlowStep] = []
    for crit in criteria:
        matches = _matches(current, crit)
        if crit.kind == EXCLUSION:
            keep = ~matches
        elif isinstance(crit.predicate, NonMissing):
            # the one predicate that rules on missingness directly
            keep = matches
        else:
            # inclusion keeps matches; rows missing on the column are deferred
            keep = matches | current.column(crit.column).missing
        n_before = current.n_rows
        current = current.take_rows(keep)
        steps.append(FlowStep(crit.label, n_before, n_before - current.n_rows, current.n_rows))

    n_before = current.n_rows
    current, n_incomplete = complete_cases(current, analysis_vars)
    steps.append(FlowStep("incomplete data", n_before, n_incomplete, current.n_rows))
    return current, Flowchart(ds.n_rows, tuple(steps))


@dataclass(frozen=True)
class MissingnessEntry:
    variable: str
    test: str
    statistic: float
    df: float
    p_value: float
    n_complete: int
    n_incomplete: int

    def to_dict(self) -> dict:
        return {
            "variable": self.variable,
            "test": self.test,
            "statistic": self.statistic,
            "df": self.df,
            "p_value": self.p_value,
            "n_complete": self.n_complete,
            "n_incomplete": self.n_incomplete,
        }


@dataclass(frozen=True)
class MissingnessReport:
    entries: tuple[MissingnessEntry, ...] = ()
    reason: str | None = None  # set when the comparison is degenerate

    def to_dict(self) -> dict:
        return {"entries": [e.to_dict() for e in self.entries], "reason": self.reason}


def missingness_comparison(ds: Dataset, analysis_vars) -> MissingnessReport:
    """Compare complete-case rows against rows with any missing analysis value.

    Each variable is tested where it is observed in both groups: chi-square
    for categorical columns, Welch t for continuous ones.  Variables whose
    observed values cannot support the test (a degenerate margin or
    variance) are skipped.
    """
    require_clean(ds)
    incomplete = np.zeros(ds.n_rows, dtype=bool)
    for v in analysis_vars:
        incomplete |= ds.column(v).missing
    if not incomplete.any():
        return MissingnessReport(reason="no incomplete group")
    if incomplete.all():
        return MissingnessReport(reason="no complete group")

    entries: list[MissingnessEntry] = []
    for v in analysis_vars:
        spec = ds.schema.column(v)
        col = ds.column(v)
        obs = ~col.missing
        grp_c = obs & ~incomplete
        grp_i = obs & incomplete
        if not grp_c.any() or not grp_i.any():
            continue
        if spec.is_categorical:
            k = len(spec.categories)
            counts_c = np.bincount(col.values[grp_c].astype(np.int64), minlength=k)
            counts_i = np.bincount(col.values[grp_i].astype(np.int64), minlength=k)
            table = np.stack([counts_c, counts_i])
            table = table[:, table.sum(axis=0) > 0]
            if table.shape[1] < 2:
                continue
            try:
                res = chi_square_independence(table)
            except DegenerateVariance:
                continue
        else:
            try:
                res = welch_t_test(col.values[grp_c], col.values[grp_i])
            except (UndersizedSample, DegenerateVariance):
                continue
        df = res.df if isinstance(res.df, float) else res.df[0]
        entries.append(
            MissingnessEntry(
                variable=v,
                test=res.test,
                statistic=res.statistic,
                df=df,
                p_value=res.p_value,
                n_complete=int(grp_c.sum()),
                n_incomplete=int(grp_i.sum()),
            )
        )
    return MissingnessReport(tuple(entries))
