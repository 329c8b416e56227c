"""Descriptive summaries and classical hypothesis tests."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, require_clean
from .errors import (
    DegenerateMargin,
    DegenerateVariance,
    EmptySample,
    UndersizedSample,
)
from .special import chi2_upper_p, f_upper_p, t_two_sided_p


@dataclass(frozen=True)
class ContinuousSummary:
    min: float
    max: float
    mean: float
    median: float
    q1: float
    q3: float
    sd: float  # sample sd (n-1); 0 by convention for a singleton
    n: int

    def to_dict(self) -> dict:
        return {
            "kind": "continuous",
            "min": self.min,
            "max": self.max,
            "mean": self.mean,
            "median": self.median,
            "q1": self.q1,
            "q3": self.q3,
            "sd": self.sd,
            "n": self.n,
        }


@dataclass(frozen=True)
class CategoricalSummary:
    counts: dict[str, int]
    percentages: dict[str, float]  # of non-missing
    n: int
    n_missing: int

    def to_dict(self) -> dict:
        return {
            "kind": "categorical",
            "counts": dict(self.counts),
            "percentages": dict(self.percentages),
            "n": self.n,
            "n_missing": self.n_missing,
        }


@dataclass(frozen=True)
class TestResult:
    test: str
    statistic: float
    df: float | tuple[float, float]
    p_value: float

    def to_dict(self) -> dict:
        df = list(self.df) if isinstance(self.df, tuple) else self.df
        return {"test": self.test, "statistic": self.statistic, "df": df, "p_value": self.p_value}


def describe(ds: Dataset, column: str) -> ContinuousSummary | CategoricalSummary:
    """Summarize one column over its non-missing values."""
    require_clean(ds)
    spec = ds.schema.column(column)
    col = ds.column(column)
    # Sorting first makes every statistic bitwise permutation-invariant.
    obs = np.sort(col.values[~col.missing])
    n_missing = int(col.missing.sum())
    if obs.size == 0:
        raise EmptySample(f"column {column!r} has no observed values")
    if spec.is_categorical:
        counts = {c: 0 for c in spec.categories}
        binned = np.bincount(obs.astype(np.int64), minlength=len(spec.categories))
        for i, c in enumerate(spec.categories):
            counts[c] = int(binned[i])
        total = int(obs.size)
        percentages = {c: 100.0 * counts[c] / total for c in spec.categories}
        return CategoricalSummary(counts, percentages, total, n_missing)
    q1, med, q3 = np.quantile(obs, [0.25, 0.5, 0.75], method="linear")
    sd = float(obs.std(ddof=1)) if obs.size > 1 else 0.0
    return ContinuousSummary(
        min=float(obs.min()),
        max=float(obs.max()),
        mean=float(obs.mean()),
        median=float(med),
        q1=float(q1),
        q3=float(q3),
        sd=sd,
        n=int(obs.size),
    )


def welch_t_test(a, b) -> TestResult:
    """Two-sided Welch t-test with Welch-Satterthwaite degrees of freedom."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise UndersizedSample("each sample needs at least 2 values")
    va = float(a.var(ddof=1))
    vb = float(b.var(ddof=1))
    if va <= 0.0 and vb <= 0.0:
        raise DegenerateVariance("both samples have zero variance")
    sa2 = va / a.size
    sb2 = vb / b.size
    se = np.sqrt(sa2 + sb2)
    t = (float(a.mean()) - float(b.mean())) / se
    df = (sa2 + sb2) ** 2 / (sa2**2 / (a.size - 1) + sb2**2 / (b.size - 1))
    return TestResult("welch_t", float(t), float(df), t_two_sided_p(float(t), float(df)))


def one_way_anova(groups) -> TestResult:
    """One-way ANOVA F-test over two or more groups."""
    samples = [np.asarray(g, dtype=np.float64) for g in groups]
    if len(samples) < 2:
        raise UndersizedSample("need at least 2 groups")
    if any(g.size < 2 for g in samples):
        raise UndersizedSample("each group needs at least 2 values")
    k = len(samples)
    n_total = sum(g.size for g in samples)
    grand = sum(float(g.sum()) for g in samples) / n_total
    ssb = sum(g.size * (float(g.mean()) - grand) ** 2 for g in samples)
    ssw = sum(float(((g - g.mean()) ** 2).sum()) for g in samples)
    if ssw <= 0.0:
        raise DegenerateVariance("zero within-group variance")
    df1 = k - 1
    df2 = n_total - k
    f = (ssb / df1) / (ssw / df2)
    return TestResult("anova_f", float(f), (float(df1), float(df2)), f_upper_p(float(f), df1, df2))


def chi_square_independence(table) -> TestResult:
    """Pearson chi-square test of independence on an r x c count table."""
    t = np.asarray(table, dtype=np.float64)
    if t.ndim != 2 or t.shape[0] < 2 or t.shape[1] < 2:
        raise DegenerateMargin("need an r x c table with r, c >= 2")
    if (t < 0).any():
        raise DegenerateMargin("counts must be non-negative")
    rows = t.sum(axis=1)
    cols = t.sum(axis=0)
    if (rows <= 0).any() or (cols <= 0).any():
        raise DegenerateMargin("zero row or column margin")
    expected = np.outer(rows, cols) / t.sum()
    stat = float(((t - expected) ** 2 / expected).sum())
    df = (t.shape[0] - 1) * (t.shape[1] - 1)
    return TestResult("chi_square", stat, float(df), chi2_upper_p(stat, df))


def frequency_table(summary: CategoricalSummary) -> str:
    """Render a category / N (%) table like the workbench's cohort reports."""
    width = max((len(c) for c in summary.counts), default=8)
    lines = [f"{'category'.ljust(width)}  N (%)"]
    for cat, n in summary.counts.items():
        lines.append(f"{cat.ljust(width)}  {n} ({summary.percentages[cat]:.1f})")
    lines.append(f"{'missing'.ljust(width)}  {summary.n_missing}")
    return "\n".join(lines)
