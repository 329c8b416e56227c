"""Radial-basis-function kernel evaluations."""

from __future__ import annotations

import numpy as np

from ..errors import DimensionMismatch


def rbf_kernel(x: np.ndarray, y: np.ndarray, gamma: float) -> float:
    """exp(−gamma·‖x−y‖²) for a single pair of vectors."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise DimensionMismatch(f"vector lengths differ: {x.shape[0]} vs {y.shape[0]}")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    d = x - y
    return float(np.exp(-gamma * np.dot(d, d)))


def rbf_kernel_matrix(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    """Pairwise kernel values between the rows of a and the rows of b."""
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatch(f"feature widths differ: {a.shape[1]} vs {b.shape[1]}")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    sq = (
        (a * a).sum(axis=1)[:, None]
        + (b * b).sum(axis=1)[None, :]
        - 2.0 * (a @ b.T)
    )
    np.maximum(sq, 0.0, out=sq)  # clamp negative rounding residue so K(x,x)=1
    return np.exp(-gamma * sq)
