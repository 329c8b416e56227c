"""Stratified k-fold cross-validation and cost/gamma grid screening with
sensitivity/specificity selection."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from ..errors import ClinlabError, FoldError, GridError, UndefinedMetric
from .smo import SmoConfig, SvmModel, decision_values, train_smo


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}

    @classmethod
    def from_dict(cls, d: dict) -> "ConfusionMatrix":
        return cls(tp=int(d["tp"]), fp=int(d["fp"]), tn=int(d["tn"]), fn=int(d["fn"]))


@dataclass(frozen=True)
class Metrics:
    sensitivity: float
    specificity: float
    youden: float
    accuracy: float

    def to_dict(self) -> dict:
        return {
            "sensitivity": self.sensitivity,
            "specificity": self.specificity,
            "youden": self.youden,
            "accuracy": self.accuracy,
        }


def metrics(cm: ConfusionMatrix) -> Metrics:
    """sensitivity = tp/(tp+fn), specificity = tn/(tn+fp),
    youden = sensitivity + specificity − 1, accuracy = correct/total."""
    if cm.tp + cm.fn == 0:
        raise UndefinedMetric("no positive rows: sensitivity undefined")
    if cm.tn + cm.fp == 0:
        raise UndefinedMetric("no negative rows: specificity undefined")
    sens = cm.tp / (cm.tp + cm.fn)
    spec = cm.tn / (cm.tn + cm.fp)
    return Metrics(
        sensitivity=sens,
        specificity=spec,
        youden=sens + spec - 1.0,
        accuracy=(cm.tp + cm.tn) / cm.total,
    )


def stratified_folds(y: np.ndarray, k: int, seed: int = 0) -> np.ndarray:
    """Per-class shuffled round-robin fold ids; per-fold class counts differ
    from exact proportion by at most one."""
    y = np.asarray(y)
    if k < 2:
        raise FoldError("need at least 2 folds")
    rng = np.random.default_rng(seed)
    folds = np.empty(y.shape[0], dtype=np.int64)
    for cls in np.unique(y):
        idx = np.flatnonzero(y == cls)
        if idx.size < k:
            raise FoldError(f"class {cls!r} has {idx.size} rows, fewer than k={k}")
        perm = rng.permutation(idx)
        folds[perm] = np.arange(idx.size) % k
    return folds


@dataclass(frozen=True)
class GridCell:
    gamma: float
    cost: float
    confusion: ConfusionMatrix | None
    sensitivity: float | None
    specificity: float | None
    youden: float | None
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "cost": self.cost,
            "confusion": self.confusion.to_dict() if self.confusion else None,
            "sensitivity": self.sensitivity,
            "specificity": self.specificity,
            "youden": self.youden,
            "error": self.error,
        }


@dataclass(frozen=True)
class GridResult:
    cells: tuple[GridCell, ...]
    best_index: int
    k: int
    seed: int

    @property
    def best(self) -> GridCell:
        return self.cells[self.best_index]

    def to_dict(self) -> dict:
        return {
            "cells": [c.to_dict() for c in self.cells],
            "best_index": self.best_index,
            "k": self.k,
            "seed": self.seed,
        }

    def to_csv(self) -> str:
        """gamma,cost,tp,fp,tn,fn,sensitivity,specificity,youden rows in grid
        order; failed cells carry empty counts."""
        buf = io.StringIO()
        buf.write("gamma,cost,tp,fp,tn,fn,sensitivity,specificity,youden\n")
        for c in self.cells:
            if c.confusion is None:
                buf.write(f"{c.gamma!r},{c.cost!r},,,,,,,\n")
            else:
                cm = c.confusion
                buf.write(
                    f"{c.gamma!r},{c.cost!r},{cm.tp},{cm.fp},{cm.tn},{cm.fn},"
                    f"{c.sensitivity!r},{c.specificity!r},{c.youden!r}\n"
                )
        return buf.getvalue()


DEFAULT_GAMMAS = (0.001, 0.01, 0.1, 1.0, 10.0)
DEFAULT_COSTS = (0.1, 1.0, 10.0, 100.0)


def _cell_seed(seed: int, cell: int, fold: int) -> int:
    return int(np.random.SeedSequence([seed, cell, fold]).generate_state(1, np.uint64)[0])


def grid_search(
    x: np.ndarray,
    y: np.ndarray,
    gammas=DEFAULT_GAMMAS,
    costs=DEFAULT_COSTS,
    k: int = 10,
    seed: int = 0,
    config: SmoConfig = SmoConfig(),
) -> GridResult:
    """Screen every (gamma, cost) pair with k-fold CV on one shared fold
    split; out-of-fold predictions pool into a single confusion matrix per
    cell.  The best cell maximizes the Youden index, with ties going to
    higher sensitivity, then lower cost, then lower gamma.  Per-cell
    training failures are recorded in the cell, and only an all-cell
    failure raises."""
    gammas = tuple(float(g) for g in gammas)
    costs = tuple(float(c) for c in costs)
    if not gammas or not costs:
        raise GridError("empty parameter grid")
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    folds = stratified_folds(y, k, seed)

    cells: list[GridCell] = []
    cell_idx = 0
    for gamma in gammas:
        for cost in costs:
            tp = fp = tn = fn = 0
            failure: str | None = None
            for fold in range(k):
                test = folds == fold
                train = ~test
                cfg = SmoConfig(
                    tol=config.tol,
                    max_passes=config.max_passes,
                    max_sweeps=config.max_sweeps,
                    class_weights=config.class_weights,
                    seed=_cell_seed(seed, cell_idx, fold),
                )
                try:
                    model = train_smo(x[train], y[train], cost, gamma, cfg)
                except ClinlabError as exc:
                    failure = f"fold {fold}: {exc}"
                    break
                dv = decision_values(model, x[test])
                pred = dv > 0.0
                pos = y[test] == 1
                tp += int((pred & pos).sum())
                fp += int((pred & ~pos).sum())
                tn += int((~pred & ~pos).sum())
                fn += int((~pred & pos).sum())
            if failure is None:
                cm = ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn)
                m = metrics(cm)
                cells.append(
                    GridCell(
                        gamma=gamma,
                        cost=cost,
                        confusion=cm,
                        sensitivity=m.sensitivity,
                        specificity=m.specificity,
                        youden=m.youden,
                    )
                )
            else:
                cells.append(
                    GridCell(
                        gamma=gamma,
                        cost=cost,
                        confusion=None,
                        sensitivity=None,
                        specificity=None,
                        youden=None,
                        error=failure,
                    )
                )
            cell_idx += 1

    best_index = -1
    for i, c in enumerate(cells):
        if c.youden is None:
            continue
        if best_index < 0:
            best_index = i
            continue
        b = cells[best_index]
        if (
            c.youden > b.youden
            or (c.youden == b.youden and c.sensitivity > b.sensitivity)
            or (c.youden == b.youden and c.sensitivity == b.sensitivity and c.cost < b.cost)
            or (
                c.youden == b.youden
                and c.sensitivity == b.sensitivity
                and c.cost == b.cost
                and c.gamma < b.gamma
            )
        ):
            best_index = i
    if best_index < 0:
        raise GridError("every grid cell failed to train")
    return GridResult(cells=tuple(cells), best_index=best_index, k=k, seed=seed)


def refit_best(
    x: np.ndarray,
    y: np.ndarray,
    result: GridResult,
    config: SmoConfig = SmoConfig(),
    labels: tuple[str, str] | None = None,
    encoder_fingerprint: str | None = None,
) -> SvmModel:
    """Retrain on the full data at the winning cell's parameters."""
    best = result.best
    cfg = SmoConfig(
        tol=config.tol,
        max_passes=config.max_passes,
        max_sweeps=config.max_sweeps,
        class_weights=config.class_weights,
        seed=_cell_seed(result.seed, len(result.cells), 0),
    )
    return refit_at(x, y, best.gamma, best.cost, cfg, labels, encoder_fingerprint)


def refit_at(
    x: np.ndarray,
    y: np.ndarray,
    gamma: float,
    cost: float,
    config: SmoConfig,
    labels: tuple[str, str] | None = None,
    encoder_fingerprint: str | None = None,
) -> SvmModel:
    return train_smo(
        x,
        y,
        cost,
        gamma,
        config,
        labels=labels,
        encoder_fingerprint=encoder_fingerprint,
    )
