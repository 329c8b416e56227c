"""Typed column schemas for rectangular clinical tables."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .errors import MissingColumn, SchemaError

CONTINUOUS = "continuous"
CATEGORICAL = "categorical"


@dataclass(frozen=True)
class ColumnSpec:
    """Declaration of one column: its kind, value domain and sentinel codes.

    ``categories`` is the closed label set of a categorical column;
    ``valid_range`` is an inclusive [lo, hi] bound for a continuous one.
    ``sentinel_codes`` are raw strings that stand for "not available" and
    are matched against the raw CSV cell before any parsing.
    """

    name: str
    kind: str
    categories: tuple[str, ...] | None = None
    valid_range: tuple[float, float] | None = None
    sentinel_codes: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        if not self.name:
            raise SchemaError("column name must be non-empty")
        if self.kind not in (CONTINUOUS, CATEGORICAL):
            raise SchemaError(f"column {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == CATEGORICAL:
            if not self.categories:
                raise SchemaError(f"categorical column {self.name!r} needs categories")
            if len(set(self.categories)) != len(self.categories):
                raise SchemaError(f"column {self.name!r}: duplicate categories")
            if self.valid_range is not None:
                raise SchemaError(f"categorical column {self.name!r} cannot have valid_range")
            object.__setattr__(self, "categories", tuple(self.categories))
        else:
            if self.categories is not None:
                raise SchemaError(f"continuous column {self.name!r} cannot have categories")
            if self.valid_range is not None:
                lo, hi = self.valid_range
                if not lo <= hi:
                    raise SchemaError(f"column {self.name!r}: empty valid_range")
                object.__setattr__(self, "valid_range", (float(lo), float(hi)))
        object.__setattr__(self, "sentinel_codes", frozenset(self.sentinel_codes))

    @property
    def is_categorical(self) -> bool:
        return self.kind == CATEGORICAL

    def to_dict(self) -> dict:
        d: dict = {"name": self.name, "kind": self.kind}
        if self.categories is not None:
            d["categories"] = list(self.categories)
        if self.valid_range is not None:
            d["valid_range"] = [self.valid_range[0], self.valid_range[1]]
        if self.sentinel_codes:
            d["sentinels"] = sorted(self.sentinel_codes)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ColumnSpec":
        return cls(
            name=d["name"],
            kind=d["kind"],
            categories=tuple(d["categories"]) if "categories" in d else None,
            valid_range=tuple(d["valid_range"]) if d.get("valid_range") else None,
            sentinel_codes=frozenset(d.get("sentinels", ())),
        )


@dataclass(frozen=True)
class Schema:
    """Ordered collection of column specs with unique names."""

    columns: tuple[ColumnSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            dup = next(n for n in names if names.count(n) > 1)
            raise SchemaError(f"duplicate column name {dup!r}")

    def __iter__(self):
        return iter(self.columns)

    def __len__(self) -> int:
        return len(self.columns)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    def column(self, name: str) -> ColumnSpec:
        for c in self.columns:
            if c.name == name:
                return c
        raise MissingColumn(name)

    def index(self, name: str) -> int:
        for i, c in enumerate(self.columns):
            if c.name == name:
                return i
        raise MissingColumn(name)

    def subset(self, names: list[str] | tuple[str, ...]) -> "Schema":
        return Schema(tuple(self.column(n) for n in names))

    def replace(self, name: str, spec: ColumnSpec) -> "Schema":
        i = self.index(name)
        cols = list(self.columns)
        cols[i] = spec
        return Schema(tuple(cols))

    def to_dict(self) -> dict:
        return {"columns": [c.to_dict() for c in self.columns]}

    @classmethod
    def from_dict(cls, d: dict) -> "Schema":
        if "columns" not in d:
            raise SchemaError("schema config needs a 'columns' list")
        return cls(tuple(ColumnSpec.from_dict(c) for c in d["columns"]))

    def fingerprint(self) -> str:
        """Stable sha256 over the canonical JSON form of the schema."""
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return "sha256:" + hashlib.sha256(canon.encode("utf-8")).hexdigest()
