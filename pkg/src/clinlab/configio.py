"""One JSON config-file format for schemas, criteria, generator profiles
and prediction records, so every command and endpoint shares a single
parser and a single set of failure modes."""

from __future__ import annotations

import json
from pathlib import Path

from .cohort import Criterion
from .errors import ConfigError
from .schema import Schema
from .synth import GeneratorConfig


def read_json(path) -> dict:
    p = Path(path)
    try:
        raw = json.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"{p}: no such file") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{p}: top level must be a JSON object")
    return raw


def _section(raw: dict, path, key: str) -> object:
    if key not in raw:
        raise ConfigError(f"{path}: missing {key!r} section")
    return raw[key]


def load_schema(path) -> Schema:
    return Schema.from_dict(read_json(path))


def load_criteria(path) -> list[Criterion]:
    entries = _section(read_json(path), path, "criteria")
    if not isinstance(entries, list):
        raise ConfigError(f"{path}: 'criteria' must be a list")
    try:
        return [Criterion.from_dict(d) for d in entries]
    except KeyError as exc:
        raise ConfigError(f"{path}: criterion missing field {exc}") from None


def load_generator_config(path) -> GeneratorConfig:
    try:
        return GeneratorConfig.from_dict(read_json(path))
    except KeyError as exc:
        raise ConfigError(f"{path}: generator config missing field {exc}") from None


def load_record(path) -> dict:
    record = _section(read_json(path), path, "record")
    if not isinstance(record, dict):
        raise ConfigError(f"{path}: 'record' must be an object of variable -> value")
    return record


def write_json(obj: dict, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")
