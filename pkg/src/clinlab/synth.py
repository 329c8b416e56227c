"""Deterministic synthetic assault-cohort generator.

Produces a full intake table whose *included* sub-population (after the
default exclusion criteria and the complete-case step) reproduces the
published reference marginals, with a planted causal chain
victim_category → time_to_evaluation → tiw strong enough for structure
search to recover, plus planted criteria-excluded rows and partially
missing rows so the selection flowchart has real work to do.

Everything is quota-based: category counts come from largest-remainder
allocation of the target proportions, and joint structure comes from
seeded within-group shuffles, so marginals are near-exact at any size and
a seed fully determines the table.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cohort import EXCLUSION, Criterion, Equals
from .dataset import Dataset
from .errors import GeneratorConfigError, InfeasibleImplant
from .schema import CATEGORICAL, CONTINUOUS, ColumnSpec, Schema


def largest_remainder(weights, n: int) -> np.ndarray:
    """Integer allocation of n units proportional to weights: floor the
    quotas, then hand the leftover units to the largest remainders (ties
    to the earlier entry)."""
    w = np.asarray(weights, dtype=np.float64)
    if n < 0 or w.size == 0 or (w < 0).any() or w.sum() <= 0:
        raise GeneratorConfigError("weights must be non-negative with a positive sum")
    quota = w * (n / w.sum())
    base = np.floor(quota).astype(np.int64)
    short = n - int(base.sum())
    order = np.argsort(-(quota - base), kind="stable")
    base[order[:short]] += 1
    return base


@dataclass(frozen=True)
class MarginalSpec:
    """Target categorical marginal: categories and their proportions."""

    name: str
    categories: tuple[str, ...]
    proportions: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "categories", tuple(self.categories))
        object.__setattr__(self, "proportions", tuple(float(p) for p in self.proportions))
        if len(self.categories) != len(self.proportions) or len(self.categories) < 2:
            raise GeneratorConfigError(
                f"{self.name!r}: need matching categories/proportions, at least 2"
            )
        if any(p < 0 for p in self.proportions):
            raise GeneratorConfigError(f"{self.name!r}: negative proportion")
        if abs(sum(self.proportions) - 1.0) > 1e-6:
            raise GeneratorConfigError(f"{self.name!r}: proportions must sum to 1")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "categories": list(self.categories),
            "proportions": list(self.proportions),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MarginalSpec":
        return cls(d["name"], tuple(d["categories"]), tuple(d["proportions"]))


@dataclass(frozen=True)
class ImplantedEdge:
    """Conditional distributions of `child` for selected parent categories.

    Parent categories not listed share one balance distribution, solved so
    the mixture over all parent categories reproduces the child's target
    marginal; an implant too strong for the marginal to absorb is rejected.
    """

    parent: str
    child: str
    conditionals: tuple[tuple[str, tuple[float, ...]], ...]

    def __post_init__(self):
        object.__setattr__(
            self,
            "conditionals",
            tuple((c, tuple(float(x) for x in dist)) for c, dist in self.conditionals),
        )
        for cat, dist in self.conditionals:
            if any(p < 0 for p in dist) or abs(sum(dist) - 1.0) > 1e-6:
                raise GeneratorConfigError(
                    f"implant {self.parent!r}→{self.child!r}: bad distribution for {cat!r}"
                )

    def to_dict(self) -> dict:
        return {
            "parent": self.parent,
            "child": self.child,
            "conditionals": [[c, list(d)] for c, d in self.conditionals],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ImplantedEdge":
        return cls(
            d["parent"],
            d["child"],
            tuple((c, tuple(dist)) for c, dist in d["conditionals"]),
        )


@dataclass(frozen=True)
class DerivedContinuous:
    """A continuous column drawn per category of a categorical parent from
    a fixed value grid with quota weights (e.g. day counts within a band)."""

    name: str
    parent: str
    values: tuple[tuple[float, ...], ...]  # one grid per parent category
    weights: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(tuple(map(float, v)) for v in self.values))
        object.__setattr__(self, "weights", tuple(tuple(map(float, w)) for w in self.weights))
        if len(self.values) != len(self.weights) or any(
            len(v) != len(w) or not v for v, w in zip(self.values, self.weights)
        ):
            raise GeneratorConfigError(f"{self.name!r}: values/weights shape mismatch")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "parent": self.parent,
            "values": [list(v) for v in self.values],
            "weights": [list(w) for w in self.weights],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DerivedContinuous":
        return cls(
            d["name"],
            d["parent"],
            tuple(tuple(v) for v in d["values"]),
            tuple(tuple(w) for w in d["weights"]),
        )


@dataclass(frozen=True)
class ExclusionPlant:
    """A yes/no flag column plus how many planted rows answer yes."""

    flag: str
    count: int

    def __post_init__(self):
        if self.count < 0:
            raise GeneratorConfigError(f"flag {self.flag!r}: negative count")

    def to_dict(self) -> dict:
        return {"flag": self.flag, "count": self.count}

    @classmethod
    def from_dict(cls, d: dict) -> "ExclusionPlant":
        return cls(d["flag"], int(d["count"]))


@dataclass(frozen=True)
class GeneratorConfig:
    n_total: int
    seed: int
    variables: tuple[MarginalSpec, ...]
    implants: tuple[ImplantedEdge, ...] = ()
    derived: tuple[DerivedContinuous, ...] = ()
    exclusions: tuple[ExclusionPlant, ...] = ()
    n_incomplete: int = 0
    incomplete_vars: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "implants", tuple(self.implants))
        object.__setattr__(self, "derived", tuple(self.derived))
        object.__setattr__(self, "exclusions", tuple(self.exclusions))
        object.__setattr__(self, "incomplete_vars", tuple(self.incomplete_vars))
        if self.n_total < 1:
            raise GeneratorConfigError("n_total must be positive")
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise GeneratorConfigError("duplicate variable names")
        by_name = {v.name: v for v in self.variables}
        planted = self.n_incomplete + sum(e.count for e in self.exclusions)
        if self.n_incomplete < 0 or planted >= self.n_total:
            raise GeneratorConfigError(
                "planted incomplete + excluded rows must leave at least one clean row"
            )
        children = set()
        for edge in self.implants:
            for endpoint in (edge.parent, edge.child):
                if endpoint not in by_name:
                    raise GeneratorConfigError(f"implant names unknown variable {endpoint!r}")
            if edge.child in children:
                raise GeneratorConfigError(
                    f"{edge.child!r} is the child of more than one implant"
                )
            children.add(edge.child)
            child = by_name[edge.child]
            parent = by_name[edge.parent]
            for cat, dist in edge.conditionals:
                if cat not in parent.categories:
                    raise GeneratorConfigError(
                        f"implant {edge.parent!r}→{edge.child!r}: {cat!r} not a parent category"
                    )
                if len(dist) != len(child.categories):
                    raise GeneratorConfigError(
                        f"implant {edge.parent!r}→{edge.child!r}: distribution width mismatch"
                    )
        parent_of = {e.child: e.parent for e in self.implants}
        for start in parent_of:
            node, hops = start, 0
            while node in parent_of:
                node = parent_of[node]
                hops += 1
                if hops > len(self.implants):
                    raise GeneratorConfigError("implanted edges form a cycle")
        for dc in self.derived:
            if dc.parent not in by_name:
                raise GeneratorConfigError(f"derived {dc.name!r}: unknown parent {dc.parent!r}")
            if len(dc.values) != len(by_name[dc.parent].categories):
                raise GeneratorConfigError(f"derived {dc.name!r}: one grid per parent category")
            if dc.name in by_name:
                raise GeneratorConfigError(f"derived {dc.name!r} clashes with a variable")
        flag_names = [e.flag for e in self.exclusions]
        if len(set(flag_names)) != len(flag_names):
            raise GeneratorConfigError("duplicate exclusion flags")
        for v in self.incomplete_vars:
            if v not in by_name and v not in {d.name for d in self.derived}:
                raise GeneratorConfigError(f"incomplete_vars names unknown column {v!r}")
        if self.n_incomplete > 0 and not self.incomplete_vars:
            raise GeneratorConfigError("n_incomplete > 0 needs incomplete_vars")

    def to_dict(self) -> dict:
        return {
            "n_total": self.n_total,
            "seed": self.seed,
            "variables": [v.to_dict() for v in self.variables],
            "implants": [e.to_dict() for e in self.implants],
            "derived": [d.to_dict() for d in self.derived],
            "exclusions": [e.to_dict() for e in self.exclusions],
            "n_incomplete": self.n_incomplete,
            "incomplete_vars": list(self.incomplete_vars),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorConfig":
        return cls(
            n_total=int(d["n_total"]),
            seed=int(d["seed"]),
            variables=tuple(MarginalSpec.from_dict(v) for v in d["variables"]),
            implants=tuple(ImplantedEdge.from_dict(e) for e in d.get("implants", [])),
            derived=tuple(DerivedContinuous.from_dict(x) for x in d.get("derived", [])),
            exclusions=tuple(ExclusionPlant.from_dict(e) for e in d.get("exclusions", [])),
            n_incomplete=int(d.get("n_incomplete", 0)),
            incomplete_vars=tuple(d.get("incomplete_vars", [])),
        )


def _rng(*key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(list(key)))


def _quota_column(weights, n: int, rng: np.random.Generator) -> np.ndarray:
    """Codes 0..k−1 with largest-remainder counts, shuffled."""
    counts = largest_remainder(weights, n)
    codes = np.repeat(np.arange(counts.size, dtype=np.int64), counts)
    rng.shuffle(codes)
    return codes


def _solve_balance(
    marginal: np.ndarray,
    parent_props: np.ndarray,
    fixed: dict[int, np.ndarray],
    edge: ImplantedEdge,
) -> np.ndarray:
    free_weight = float(sum(p for i, p in enumerate(parent_props) if i not in fixed))
    if free_weight <= 0:
        raise GeneratorConfigError(
            f"implant {edge.parent!r}→{edge.child!r}: no unconstrained parent category"
        )
    acc = marginal.astype(np.float64).copy()
    for i, dist in fixed.items():
        acc -= parent_props[i] * dist
    balance = acc / free_weight
    if (balance < -1e-9).any():
        raise InfeasibleImplant(
            f"implant {edge.parent!r}→{edge.child!r}: conditionals cannot reproduce "
            f"the marginal of {edge.child!r} (a balance share would be negative)"
        )
    return np.clip(balance, 0.0, None)


def _conditional_tables(config: GeneratorConfig) -> dict[str, dict[int, np.ndarray]]:
    """Per implanted child: parent-code → child distribution."""
    by_name = {v.name: v for v in config.variables}
    tables: dict[str, dict[int, np.ndarray]] = {}
    for edge in config.implants:
        parent = by_name[edge.parent]
        child = by_name[edge.child]
        fixed = {
            parent.categories.index(cat): np.asarray(dist, dtype=np.float64)
            for cat, dist in edge.conditionals
        }
        balance = _solve_balance(
            np.asarray(child.proportions), np.asarray(parent.proportions), fixed, edge
        )
        tables[edge.child] = {
            i: fixed.get(i, balance) for i in range(len(parent.categories))
        }
    return tables


def _generate_block(
    config: GeneratorConfig, n: int, block: int
) -> dict[str, np.ndarray]:
    """One block of n rows honouring marginals, implants and derivations."""
    by_name = {v.name: v for v in config.variables}
    parent_of = {e.child: e.parent for e in config.implants}
    cond = _conditional_tables(config)
    columns: dict[str, np.ndarray] = {}

    def build(name: str) -> None:
        if name in columns:
            return
        var = by_name[name]
        vi = list(by_name).index(name)
        if name not in parent_of:
            columns[name] = _quota_column(var.proportions, n, _rng(config.seed, block, vi))
            return
        build(parent_of[name])
        parent_codes = columns[parent_of[name]]
        codes = np.empty(n, dtype=np.int64)
        for p_code, dist in cond[name].items():
            rows = np.flatnonzero(parent_codes == p_code)
            codes[rows] = _quota_column(dist, rows.size, _rng(config.seed, block, vi, p_code))
        columns[name] = codes

    for var in config.variables:
        build(var.name)

    for di, dc in enumerate(config.derived):
        parent_codes = columns[dc.parent]
        out = np.empty(n, dtype=np.float64)
        for p_code, grid in enumerate(dc.values):
            rows = np.flatnonzero(parent_codes == p_code)
            picks = _quota_column(
                dc.weights[p_code], rows.size, _rng(config.seed, block, 1000 + di, p_code)
            )
            out[rows] = np.asarray(grid)[picks]
        columns[dc.name] = out
    return columns


def generator_schema(config: GeneratorConfig) -> Schema:
    """Schema of the generated table: marginal variables, derived continuous
    columns, then one yes/no column per planted exclusion flag."""
    cols: list[ColumnSpec] = [
        ColumnSpec(name=v.name, kind=CATEGORICAL, categories=v.categories)
        for v in config.variables
    ]
    for dc in config.derived:
        flat = [x for grid in dc.values for x in grid]
        cols.append(
            ColumnSpec(
                name=dc.name,
                kind=CONTINUOUS,
                valid_range=(min(flat), max(flat)),
                sentinel_codes=frozenset({"999"}),
            )
        )
    for e in config.exclusions:
        cols.append(ColumnSpec(name=e.flag, kind=CATEGORICAL, categories=("no", "yes")))
    return Schema(tuple(cols))


def generate(config: GeneratorConfig) -> Dataset:
    """Three planted blocks — clean, criteria-excluded, incomplete — built
    independently and interleaved by one global seeded shuffle."""
    n_excluded = sum(e.count for e in config.exclusions)
    n_clean = config.n_total - config.n_incomplete - n_excluded
    schema = generator_schema(config)
    cat_or_cont = [v.name for v in config.variables] + [d.name for d in config.derived]

    blocks: list[dict[str, np.ndarray]] = []
    masks: list[dict[str, np.ndarray]] = []
    flag_blocks: list[np.ndarray] = []  # (n, n_flags) yes/no codes

    # block 0: clean rows
    b0 = _generate_block(config, n_clean, 0)
    blocks.append(b0)
    masks.append({name: np.zeros(n_clean, dtype=bool) for name in cat_or_cont})
    flag_blocks.append(np.zeros((n_clean, len(config.exclusions)), dtype=np.int64))

    # block 1: criteria-excluded rows, exactly one raised flag each
    b1 = _generate_block(config, n_excluded, 1)
    blocks.append(b1)
    masks.append({name: np.zeros(n_excluded, dtype=bool) for name in cat_or_cont})
    flags = np.zeros((n_excluded, len(config.exclusions)), dtype=np.int64)
    at = 0
    for fi, plant in enumerate(config.exclusions):
        flags[at : at + plant.count, fi] = 1
        at += plant.count
    flag_blocks.append(flags)

    # block 2: rows with exactly one missing analysis cell, round-robin
    b2 = _generate_block(config, config.n_incomplete, 2)
    blocks.append(b2)
    miss = {name: np.zeros(config.n_incomplete, dtype=bool) for name in cat_or_cont}
    for r in range(config.n_incomplete):
        miss[config.incomplete_vars[r % len(config.incomplete_vars)]][r] = True
    masks.append(miss)
    flag_blocks.append(np.zeros((config.n_incomplete, len(config.exclusions)), dtype=np.int64))

    order = _rng(config.seed, 3).permutation(config.n_total)
    data: dict[str, list] = {}
    for name in cat_or_cont:
        spec = schema.column(name)
        values = np.concatenate([b[name] for b in blocks])[order]
        missing = np.concatenate([m[name] for m in masks])[order]
        if spec.is_categorical:
            data[name] = [
                None if m else spec.categories[int(v)] for v, m in zip(values, missing)
            ]
        else:
            data[name] = [None if m else float(v) for v, m in zip(values, missing)]
    all_flags = np.concatenate(flag_blocks, axis=0)[order]
    for fi, plant in enumerate(config.exclusions):
        data[plant.flag] = [("no", "yes")[int(v)] for v in all_flags[:, fi]]

    return Dataset.from_columns(schema, data, source=f"synthetic(seed={config.seed})")


# --------------------------------------------------------------------------
# Default cohort profile
# --------------------------------------------------------------------------

#: Categorical variables entering causal structure search, in search order.
NETWORK_VARIABLES = (
    "gender",
    "examiner",
    "assault_place",
    "assailant_category",
    "assault_category",
    "injury",
    "victim_category",
    "age_band",
    "time_to_evaluation",
    "aggravating_factors",
    "tiw",
)

#: Columns the complete-case step requires to be observed.
ANALYSIS_VARIABLES = NETWORK_VARIABLES + ("tiw_days",)

_INCLUDED_N = 2892


def _margin(name: str, pairs: tuple[tuple[str, int], ...]) -> MarginalSpec:
    total = sum(c for _, c in pairs)
    return MarginalSpec(
        name=name,
        categories=tuple(c for c, _ in pairs),
        proportions=tuple(c / total for _, c in pairs),
    )


def default_config(n_total: int = 4279, seed: int = 0) -> GeneratorConfig:
    """Assault-cohort profile: reference marginals for the included
    population, a victim_category → time_to_evaluation → tiw causal chain,
    920 planted criteria exclusions and 467 single-cell-missing rows (both
    scaled when n_total differs from the default)."""
    scale = n_total / 4279
    n_incomplete = round(467 * scale)
    exclusion_counts = [round(c * scale) for c in (276, 92, 138, 184, 230)]

    variables = (
        _margin("gender", (("men", 1750), ("women", 1142))),
        MarginalSpec(
            name="examiner",
            categories=tuple(f"examiner_{i:02d}" for i in range(1, 17)),
            proportions=(1 / 16,) * 16,
        ),
        _margin(
            "assault_place",
            (
                ("public_way", 1133),
                ("other", 793),
                ("marital_home", 309),
                ("victim_home", 271),
                ("family_home", 193),
                ("workplace", 193),
            ),
        ),
        _margin(
            "assailant_category",
            (
                ("unknown_person", 949),
                ("spouse_or_ex_partner", 566),
                ("police_officer", 411),
                ("known_from_sight", 214),
                ("other_known_person", 179),
                ("other", 573),
            ),
        ),
        _margin(
            "assault_category",
            (
                ("other", 1339),
                ("marital_violence", 576),
                ("police_violence", 419),
                ("gang_assault", 365),
                ("family_violence", 193),
            ),
        ),
        _margin("injury", (("present", 2274), ("absent", 618))),
        _margin(
            "victim_category",
            (("other", 1978), ("custody", 798), ("police_officer", 116)),
        ),
        _margin(
            "age_band",
            (("11-22", 758), ("23-30", 716), ("31-40", 704), (">=41", 714)),
        ),
        _margin(
            "time_to_evaluation",
            (("0-11h", 737), ("12-47h", 673), ("48-71h", 606), (">=72h", 876)),
        ),
        _margin(
            "aggravating_factors",
            (("0", 509), ("1", 891), ("2", 826), ("3+", 666)),
        ),
        _margin("tiw", (("0-8", 2731), (">=9", 161))),
    )

    implants = (
        # custody victims get seen fast, police-officer victims late
        ImplantedEdge(
            parent="victim_category",
            child="time_to_evaluation",
            conditionals=(
                ("custody", (0.50, 0.25, 0.15, 0.10)),
                ("police_officer", (0.08, 0.12, 0.20, 0.60)),
            ),
        ),
        # long incapacity becomes sharply more likely with late evaluation
        ImplantedEdge(
            parent="time_to_evaluation",
            child="tiw",
            conditionals=(
                ("0-11h", (0.995, 0.005)),
                ("12-47h", (0.985, 0.015)),
                ("48-71h", (0.97, 0.03)),
            ),
        ),
    )

    short_w = (450.0, 400.0, 420.0, 400.0, 330.0, 270.0, 200.0, 150.0, 111.0)
    tail = [float(np.exp(-(d - 9) / 10.0)) for d in range(9, 96)]
    tail.append(sum(tail) * 0.0082)  # keep the top day populated at full size
    derived = (
        DerivedContinuous(
            name="tiw_days",
            parent="tiw",
            values=(
                tuple(float(d) for d in range(9)),
                tuple(float(d) for d in range(9, 97)),
            ),
            weights=(short_w, tuple(tail)),
        ),
    )

    exclusions = tuple(
        ExclusionPlant(flag, count)
        for flag, count in zip(
            (
                "language_barrier",
                "psychiatric_disorder",
                "bone_fracture",
                "sexual_assault",
                "involuntary_violence",
            ),
            exclusion_counts,
        )
    )

    return GeneratorConfig(
        n_total=n_total,
        seed=seed,
        variables=variables,
        implants=implants,
        derived=derived,
        exclusions=exclusions,
        n_incomplete=n_incomplete,
        incomplete_vars=ANALYSIS_VARIABLES,
    )


def default_criteria() -> tuple[Criterion, ...]:
    """One exclusion step per planted flag, in planting order."""
    return tuple(
        Criterion(
            label=label,
            column=flag,
            predicate=Equals("yes"),
            kind=EXCLUSION,
        )
        for flag, label in (
            ("language_barrier", "insufficient language comprehension"),
            ("psychiatric_disorder", "major psychiatric disorder"),
            ("bone_fracture", "bone fracture"),
            ("sexual_assault", "sexual assault"),
            ("involuntary_violence", "involuntary violence"),
        )
    )
