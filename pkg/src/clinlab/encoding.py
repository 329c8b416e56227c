"""One-hot + standardization encoding of complete datasets into matrices."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, require_clean
from .errors import (
    ConstantColumn,
    IncompleteData,
    MissingVariable,
    SingleCategory,
    UnknownCategory,
)
from .schema import Schema


@dataclass(frozen=True)
class Encoder:
    """Fitted feature layout: one-hot blocks and (mean, sd) standardizers.

    Feature order follows the order given at fit time; each categorical
    feature occupies one output column per schema category, each
    continuous feature a single standardized column.
    """

    schema: Schema  # subset covering exactly the feature variables, in order
    means: dict[str, float]
    sds: dict[str, float]

    @property
    def feature_vars(self) -> tuple[str, ...]:
        return self.schema.names

    @property
    def width(self) -> int:
        total = 0
        for spec in self.schema:
            total += len(spec.categories) if spec.is_categorical else 1
        return total

    def output_names(self) -> list[str]:
        names: list[str] = []
        for spec in self.schema:
            if spec.is_categorical:
                names.extend(f"{spec.name}={c}" for c in spec.categories)
            else:
                names.append(spec.name)
        return names

    def to_dict(self) -> dict:
        return {
            "schema": self.schema.to_dict(),
            "means": dict(self.means),
            "sds": dict(self.sds),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Encoder":
        return cls(
            schema=Schema.from_dict(d["schema"]),
            means={k: float(v) for k, v in d["means"].items()},
            sds={k: float(v) for k, v in d["sds"].items()},
        )

    def fingerprint(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return "sha256:" + hashlib.sha256(canon.encode("utf-8")).hexdigest()


def fit_encoder(ds: Dataset, feature_vars: list[str] | tuple[str, ...]) -> Encoder:
    """Learn the layout and standardization statistics from ``ds``.

    Continuous sds use the n-1 denominator; a constant continuous column
    or a categorical column with a single observed category is rejected.
    """
    require_clean(ds)
    if not ds.is_complete(feature_vars):
        raise IncompleteData("encoder requires complete data on the feature variables")
    sub = ds.schema.subset(feature_vars)
    means: dict[str, float] = {}
    sds: dict[str, float] = {}
    for spec in sub:
        col = ds.column(spec.name)
        if spec.is_categorical:
            if np.unique(col.values).size < 2:
                raise SingleCategory(spec.name)
        else:
            mean = float(col.values.mean())
            sd = float(col.values.std(ddof=1)) if len(col.values) > 1 else 0.0
            if sd <= 0.0 or not math.isfinite(sd):
                raise ConstantColumn(spec.name)
            means[spec.name] = mean
            sds[spec.name] = sd
    return Encoder(schema=sub, means=means, sds=sds)


def encode(enc: Encoder, ds: Dataset) -> np.ndarray:
    """Map a complete dataset to an (n_rows, width) float64 matrix."""
    require_clean(ds)
    if not ds.is_complete(enc.feature_vars):
        raise IncompleteData("encoding requires complete data on the feature variables")
    n = ds.n_rows
    out = np.zeros((n, enc.width), dtype=np.float64)
    offset = 0
    for spec in enc.schema:
        col = ds.column(spec.name)
        ds_spec = ds.schema.column(spec.name)
        if spec.is_categorical:
            k = len(spec.categories)
            if ds_spec.categories == spec.categories:
                codes = col.values.astype(np.int64)
            else:
                # Same column name but a different category set: remap labels.
                lookup = {c: i for i, c in enumerate(spec.categories)}
                codes = np.empty(n, dtype=np.int64)
                for i, code in enumerate(col.values):
                    label = ds_spec.categories[int(code)]
                    if label not in lookup:
                        raise UnknownCategory(spec.name, label, row=i + 1)
                    codes[i] = lookup[label]
            if codes.size and (codes.min() < 0 or codes.max() >= k):
                bad = int(np.argmax((codes < 0) | (codes >= k)))
                raise UnknownCategory(spec.name, str(col.values[bad]), row=bad + 1)
            out[np.arange(n), offset + codes] = 1.0
            offset += k
        else:
            out[:, offset] = (col.values - enc.means[spec.name]) / enc.sds[spec.name]
            offset += 1
    return out


def encode_record(enc: Encoder, record: dict) -> np.ndarray:
    """Encode one variable->value mapping into a single feature row."""
    row = np.zeros(enc.width, dtype=np.float64)
    offset = 0
    for spec in enc.schema:
        if spec.name not in record or record[spec.name] is None:
            raise MissingVariable(spec.name)
        value = record[spec.name]
        if spec.is_categorical:
            k = len(spec.categories)
            if value not in spec.categories:
                raise UnknownCategory(spec.name, str(value))
            row[offset + spec.categories.index(value)] = 1.0
            offset += k
        else:
            try:
                numeric = float(value)
            except (TypeError, ValueError):
                raise UnknownCategory(spec.name, str(value)) from None
            row[offset] = (numeric - enc.means[spec.name]) / enc.sds[spec.name]
            offset += 1
    return row
