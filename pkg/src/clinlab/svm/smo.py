"""Soft-margin RBF SVM training via SMO, with a compiled solver core and a
pure-Python fallback selected at import time.

Set ``CLINLAB_SMO_BACKEND=python`` or ``=cython`` to force a backend; the
default tries the compiled extension first.  ``active_backend()`` reports
which one is live.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionMismatch, SingleClassData
from . import _smo_py
from .kernel import rbf_kernel_matrix

_U64 = 0xFFFFFFFFFFFFFFFF


def _load_backend():
    choice = os.environ.get("CLINLAB_SMO_BACKEND", "auto").strip().lower()
    if choice in ("", "auto"):
        try:
            from . import _smo_cy

            return _smo_cy, "cython"
        except ImportError:
            return _smo_py, "python"
    if choice == "cython":
        from . import _smo_cy

        return _smo_cy, "cython"
    if choice == "python":
        return _smo_py, "python"
    raise ValueError(f"unknown CLINLAB_SMO_BACKEND value {choice!r}")


_IMPL, _BACKEND = _load_backend()


def active_backend() -> str:
    """Name of the solver backend selected at import: cython or python."""
    return _BACKEND


def solver_backends() -> dict[str, object]:
    """All importable solver modules, keyed by backend name (for benchmarks)."""
    out: dict[str, object] = {"python": _smo_py}
    try:
        from . import _smo_cy

        out["cython"] = _smo_cy
    except ImportError:
        pass
    return out


@dataclass(frozen=True)
class SmoConfig:
    tol: float = 1e-3
    max_passes: int = 5
    max_sweeps: int = 1000
    class_weights: tuple[float, float] | None = None  # (negative, positive)
    seed: int = 0

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_passes < 1 or self.max_sweeps < 1:
            raise ValueError("max_passes and max_sweeps must be at least 1")
        if self.class_weights is not None:
            w = tuple(float(x) for x in self.class_weights)
            if len(w) != 2 or w[0] <= 0 or w[1] <= 0:
                raise ValueError("class_weights must be two positive factors")
            object.__setattr__(self, "class_weights", w)

    def to_dict(self) -> dict:
        return {
            "tol": self.tol,
            "max_passes": self.max_passes,
            "max_sweeps": self.max_sweeps,
            "class_weights": list(self.class_weights) if self.class_weights else None,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SmoConfig":
        cw = d.get("class_weights")
        return cls(
            tol=float(d.get("tol", 1e-3)),
            max_passes=int(d.get("max_passes", 5)),
            max_sweeps=int(d.get("max_sweeps", 1000)),
            class_weights=tuple(cw) if cw else None,
            seed=int(d.get("seed", 0)),
        )


@dataclass(frozen=True)
class SvmModel:
    """Trained decision function f(x) = Σ coefᵢ·K(svᵢ, x) + bias with
    coefᵢ = αᵢyᵢ over the support vectors (training rows with αᵢ > 0)."""

    support_vectors: np.ndarray  # (m, d)
    dual_coef: np.ndarray  # (m,) values αᵢyᵢ
    bias: float
    gamma: float
    cost: float
    class_weights: tuple[float, float] | None = None
    labels: tuple[str, str] | None = None  # (negative, positive) display names
    encoder_fingerprint: str | None = None
    # training diagnostics; not serialized
    alpha: np.ndarray | None = field(default=None, compare=False)
    sweeps: int = field(default=0, compare=False)
    converged: bool = field(default=True, compare=False)
    backend: str = field(default="", compare=False)

    def __post_init__(self):
        sv = np.ascontiguousarray(self.support_vectors, dtype=np.float64)
        coef = np.ascontiguousarray(self.dual_coef, dtype=np.float64)
        object.__setattr__(self, "support_vectors", sv)
        object.__setattr__(self, "dual_coef", coef)
        sv.setflags(write=False)
        coef.setflags(write=False)
        if sv.ndim != 2 or coef.shape != (sv.shape[0],):
            raise ValueError("need one dual coefficient per support vector")
        if self.gamma <= 0 or self.cost <= 0:
            raise ValueError("gamma and cost must be positive")
        w = self.class_weights or (1.0, 1.0)
        if np.abs(coef).max(initial=0.0) > self.cost * max(w) + 1e-9:
            raise ValueError("dual coefficients exceed the per-class budget")

    @property
    def n_support(self) -> int:
        return self.support_vectors.shape[0]

    def to_dict(self) -> dict:
        return {
            "support_vectors": [[float(v) for v in row] for row in self.support_vectors],
            "dual_coef": [float(v) for v in self.dual_coef],
            "bias": self.bias,
            "gamma": self.gamma,
            "cost": self.cost,
            "class_weights": list(self.class_weights) if self.class_weights else None,
            "labels": list(self.labels) if self.labels else None,
            "encoder_fingerprint": self.encoder_fingerprint,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SvmModel":
        cw = d.get("class_weights")
        labels = d.get("labels")
        return cls(
            support_vectors=np.asarray(d["support_vectors"], dtype=np.float64),
            dual_coef=np.asarray(d["dual_coef"], dtype=np.float64),
            bias=float(d["bias"]),
            gamma=float(d["gamma"]),
            cost=float(d["cost"]),
            class_weights=tuple(cw) if cw else None,
            labels=tuple(labels) if labels else None,
            encoder_fingerprint=d.get("encoder_fingerprint"),
        )


def _validate_training_input(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionMismatch("feature matrix must be 2-d")
    y = np.asarray(y)
    if y.shape != (x.shape[0],):
        raise DimensionMismatch(
            f"{x.shape[0]} rows but {y.shape} labels"
        )
    yf = np.ascontiguousarray(y, dtype=np.float64)
    if not np.isin(yf, (-1.0, 1.0)).all():
        raise ValueError("labels must be -1 or +1")
    if not np.isfinite(x).all():
        raise ValueError("non-finite features")
    if (yf == 1.0).all() or (yf == -1.0).all():
        raise SingleClassData("training data contains a single class")
    return x, yf


def train_smo(
    x: np.ndarray,
    y: np.ndarray,
    cost: float,
    gamma: float,
    config: SmoConfig = SmoConfig(),
    labels: tuple[str, str] | None = None,
    encoder_fingerprint: str | None = None,
) -> SvmModel:
    """Fit the dual on (x, y ∈ {−1,+1}); per-class budgets are
    C₋ = cost·w₋ and C₊ = cost·w₊ when class weights are configured."""
    x, yf = _validate_training_input(x, y)
    if cost <= 0 or gamma <= 0:
        raise ValueError("cost and gamma must be positive")
    w_neg, w_pos = config.class_weights or (1.0, 1.0)
    c_row = np.where(yf > 0, cost * w_pos, cost * w_neg)
    kernel = rbf_kernel_matrix(x, x, gamma)
    alpha, bias, sweeps, converged = _IMPL.solve(
        kernel,
        yf,
        c_row,
        float(config.tol),
        int(config.max_passes),
        int(config.max_sweeps),
        int(config.seed) & _U64,
    )
    mask = alpha > 0.0
    return SvmModel(
        support_vectors=x[mask],
        dual_coef=(alpha * yf)[mask],
        bias=float(bias),
        gamma=float(gamma),
        cost=float(cost),
        class_weights=config.class_weights,
        labels=labels,
        encoder_fingerprint=encoder_fingerprint,
        alpha=alpha,
        sweeps=int(sweeps),
        converged=bool(converged),
        backend=_BACKEND,
    )


def decision_values(model: SvmModel, x: np.ndarray) -> np.ndarray:
    """Decision function over the rows of x."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != model.support_vectors.shape[1]:
        raise DimensionMismatch(
            f"model expects {model.support_vectors.shape[1]} features, got {x.shape[1]}"
        )
    if model.n_support == 0:
        return np.full(x.shape[0], model.bias)
    kernel = rbf_kernel_matrix(x, model.support_vectors, model.gamma)
    return kernel @ model.dual_coef + model.bias


def predict(model: SvmModel, x: np.ndarray) -> tuple[int, float]:
    """(label, decision value) for one input row; a decision value of
    exactly 0 classifies negative."""
    dv = float(decision_values(model, np.atleast_2d(x))[0])
    return (1 if dv > 0.0 else -1), dv


def predict_labels(model: SvmModel, x: np.ndarray) -> np.ndarray:
    dv = decision_values(model, x)
    return np.where(dv > 0.0, 1, -1).astype(np.int64)


def dual_objective(kernel: np.ndarray, y: np.ndarray, alpha: np.ndarray) -> float:
    """W(α) = Σαᵢ − ½ΣᵢΣⱼ αᵢαⱼyᵢyⱼK(xᵢ,xⱼ) — the quantity SMO maximizes."""
    w = alpha * np.asarray(y, dtype=np.float64)
    return float(alpha.sum() - 0.5 * (w @ kernel @ w))


def kkt_violation(
    kernel: np.ndarray,
    y: np.ndarray,
    alpha: np.ndarray,
    bias: float,
    c_row: np.ndarray,
) -> float:
    """Largest KKT violation of a dual solution: how far yᵢ·Eᵢ strays below 0
    for non-upper-bound points or above 0 for non-lower-bound points."""
    y = np.asarray(y, dtype=np.float64)
    err = kernel @ (alpha * y) + bias - y
    r = y * err
    at_upper = alpha >= c_row - 1e-12
    at_lower = alpha <= 1e-12
    worst = 0.0
    worst = max(worst, float(np.where(~at_upper, -r, 0.0).max(initial=0.0)))
    worst = max(worst, float(np.where(~at_lower, r, 0.0).max(initial=0.0)))
    return worst
