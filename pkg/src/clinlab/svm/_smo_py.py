"""Pure-Python SMO solver for the soft-margin RBF dual.

This file and ``_smo_cy.pyx`` are twins: every floating-point update is
written with the same operand grouping so that, given the same inputs and
seed, both backends walk the same pair-update sequence.  The compiled twin
is built with floating-point contraction disabled for the same reason.

Conventions: decision function f(x) = Σ αⱼyⱼK(xⱼ,x) + b, error cache
Eᵢ = f(xᵢ) − yᵢ, box constraints 0 ≤ αᵢ ≤ Cᵢ with per-sample budgets.
"""

from __future__ import annotations

import numpy as np

_STEP_EPS = 1e-7  # minimum meaningful change in one multiplier
_BOUND_EPS = 1e-12  # inset that marks a multiplier as strictly inside the box

_MASK = 0xFFFFFFFFFFFFFFFF
_MIX = 0x9E3779B97F4A7C15
_MULT = 2685821657736338717


def _rand_below(state: int, n: int) -> tuple[int, int]:
    """xorshift64* step; returns (new_state, value in [0, n))."""
    state ^= (state >> 12)
    state = (state ^ (state << 25)) & _MASK
    state ^= (state >> 27)
    return state, ((state * _MULT) & _MASK) % n


def _seed_state(seed: int) -> int:
    state = (int(seed) + _MIX) & _MASK
    return state if state != 0 else _MIX


def _take_step(i, j, K, y, C, alpha, E, b):
    """Joint optimization of multipliers i and j; returns (changed, new b)."""
    if i == j:
        return 0, b
    ai = alpha[i]
    aj = alpha[j]
    yi = y[i]
    yj = y[j]
    Ei = E[i]
    Ej = E[j]
    s = yi * yj

    if s < 0.0:
        L = max(0.0, aj - ai)
        H = min(C[j], C[i] + aj - ai)
    else:
        L = max(0.0, ai + aj - C[i])
        H = min(C[j], ai + aj)
    if L >= H:
        return 0, b

    kii = K[i, i]
    kjj = K[j, j]
    kij = K[i, j]
    eta = kii + kjj - 2.0 * kij
    if eta > 0.0:
        aj_new = aj + yj * (Ei - Ej) / eta
        if aj_new < L:
            aj_new = L
        elif aj_new > H:
            aj_new = H
    else:
        # flat or concave direction: pick the better box endpoint
        f1 = yi * (Ei - b) - ai * kii - s * aj * kij
        f2 = yj * (Ej - b) - s * ai * kij - aj * kjj
        l1 = ai + s * (aj - L)
        h1 = ai + s * (aj - H)
        psi_l = l1 * f1 + L * f2 + 0.5 * l1 * l1 * kii + 0.5 * L * L * kjj + s * L * l1 * kij
        psi_h = h1 * f1 + H * f2 + 0.5 * h1 * h1 * kii + 0.5 * H * H * kjj + s * H * h1 * kij
        if psi_l < psi_h - _STEP_EPS:
            aj_new = L
        elif psi_l > psi_h + _STEP_EPS:
            aj_new = H
        else:
            return 0, b

    if abs(aj_new - aj) < _STEP_EPS * (aj_new + aj + _STEP_EPS):
        return 0, b
    ai_new = ai + s * (aj - aj_new)
    if ai_new < 0.0:
        ai_new = 0.0
    elif ai_new > C[i]:
        ai_new = C[i]

    dai = ai_new - ai
    daj = aj_new - aj
    b1 = b - Ei - yi * dai * kii - yj * daj * kij
    b2 = b - Ej - yi * dai * kij - yj * daj * kjj
    if 0.0 < ai_new < C[i]:
        b_new = b1
    elif 0.0 < aj_new < C[j]:
        b_new = b2
    else:
        b_new = (b1 + b2) * 0.5
    db = b_new - b

    s1 = yi * dai
    s2 = yj * daj
    E += s1 * K[i] + s2 * K[j] + db
    alpha[i] = ai_new
    alpha[j] = aj_new
    return 1, b_new


def _examine(i, K, y, C, alpha, E, b, state):
    """Second-choice heuristic for i's partner; returns (changed, b, state)."""
    n = alpha.shape[0]
    diff = np.abs(E - E[i])
    diff[i] = -1.0
    j = int(np.argmax(diff))
    changed, b = _take_step(i, j, K, y, C, alpha, E, b)
    if changed:
        return 1, b, state
    state, start = _rand_below(state, n)
    for k in range(n):
        j = (start + k) % n
        if j == i:
            continue
        changed, b = _take_step(i, j, K, y, C, alpha, E, b)
        if changed:
            return 1, b, state
    return 0, b, state


def _refresh(K, y, C, alpha, E, b):
    """Recompute errors exactly and re-derive the bias from unbounded
    support vectors (falls back to the running bias when there are none)."""
    v = K @ (alpha * y)
    inside = (alpha > _BOUND_EPS) & (alpha < C - _BOUND_EPS)
    if inside.any():
        b = float((y[inside] - v[inside]).sum() / inside.sum())
    E[:] = v + b - y
    return b


def solve(K, y, C, tol, max_passes, max_sweeps, seed):
    """Run SMO sweeps until `max_passes` consecutive violation-free sweeps
    (with exact error refresh between them) or the sweep cap.

    Returns (alpha, bias, sweeps_used, converged_flag).
    """
    K = np.ascontiguousarray(K, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    C = np.ascontiguousarray(C, dtype=np.float64)
    n = K.shape[0]
    alpha = np.zeros(n)
    E = -y.copy()
    b = 0.0
    state = _seed_state(seed)
    quiet = 0
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        n_changed = 0
        for i in range(n):
            r = y[i] * E[i]
            if (r < -tol and alpha[i] < C[i]) or (r > tol and alpha[i] > 0.0):
                changed, b, state = _examine(i, K, y, C, alpha, E, b, state)
                n_changed += changed
        if n_changed > 0:
            quiet = 0
            continue
        b = _refresh(K, y, C, alpha, E, b)
        quiet += 1
        if quiet >= max_passes:
            return alpha, b, sweeps, 1
    return alpha, b, sweeps, 0
