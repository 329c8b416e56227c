# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled SMO solver for the soft-margin RBF dual.

Twin of ``_smo_py.py``: every floating-point update in the sweep uses the
same operand grouping, and the extension is compiled with floating-point
contraction disabled, so both backends walk the same pair-update sequence
for the same inputs and seed.  The infrequent exact-refresh step involves
reductions whose summation order is library-defined, so rather than
imitating it, both backends call the one implementation in ``_smo_py``.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs

from ._smo_py import _refresh

cnp.import_array()

cdef double _STEP_EPS = 1e-7
cdef double _BOUND_EPS = 1e-12
cdef unsigned long long _MIX = 0x9E3779B97F4A7C15ULL
cdef unsigned long long _MULT = 2685821657736338717ULL


cdef inline unsigned long long _next_state(unsigned long long state) nogil:
    state ^= state >> 12
    state ^= state << 25
    state ^= state >> 27
    return state


cdef int _take_step(
    Py_ssize_t i,
    Py_ssize_t j,
    double[:, ::1] K,
    double[::1] y,
    double[::1] C,
    double[::1] alpha,
    double[::1] E,
    double* b,
) nogil:
    cdef double ai, aj, yi, yj, Ei, Ej, s, L, H
    cdef double kii, kjj, kij, eta, aj_new, ai_new
    cdef double f1, f2, l1, h1, psi_l, psi_h
    cdef double dai, daj, b1, b2, b_new, db, s1, s2
    cdef Py_ssize_t k, n

    if i == j:
        return 0
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
        return 0

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
        f1 = yi * (Ei - b[0]) - ai * kii - s * aj * kij
        f2 = yj * (Ej - b[0]) - s * ai * kij - aj * kjj
        l1 = ai + s * (aj - L)
        h1 = ai + s * (aj - H)
        psi_l = l1 * f1 + L * f2 + 0.5 * l1 * l1 * kii + 0.5 * L * L * kjj + s * L * l1 * kij
        psi_h = h1 * f1 + H * f2 + 0.5 * h1 * h1 * kii + 0.5 * H * H * kjj + s * H * h1 * kij
        if psi_l < psi_h - _STEP_EPS:
            aj_new = L
        elif psi_l > psi_h + _STEP_EPS:
            aj_new = H
        else:
            return 0

    if fabs(aj_new - aj) < _STEP_EPS * (aj_new + aj + _STEP_EPS):
        return 0
    ai_new = ai + s * (aj - aj_new)
    if ai_new < 0.0:
        ai_new = 0.0
    elif ai_new > C[i]:
        ai_new = C[i]

    dai = ai_new - ai
    daj = aj_new - aj
    b1 = b[0] - Ei - yi * dai * kii - yj * daj * kij
    b2 = b[0] - Ej - yi * dai * kij - yj * daj * kjj
    if 0.0 < ai_new and ai_new < C[i]:
        b_new = b1
    elif 0.0 < aj_new and aj_new < C[j]:
        b_new = b2
    else:
        b_new = (b1 + b2) * 0.5
    db = b_new - b[0]

    s1 = yi * dai
    s2 = yj * daj
    n = alpha.shape[0]
    for k in range(n):
        E[k] = E[k] + ((s1 * K[i, k] + s2 * K[j, k]) + db)
    alpha[i] = ai_new
    alpha[j] = aj_new
    b[0] = b_new
    return 1


cdef int _examine(
    Py_ssize_t i,
    double[:, ::1] K,
    double[::1] y,
    double[::1] C,
    double[::1] alpha,
    double[::1] E,
    double* b,
    unsigned long long* state,
) nogil:
    cdef Py_ssize_t n = alpha.shape[0]
    cdef Py_ssize_t j, k, best_j, start
    cdef double d, best, Ei

    Ei = E[i]
    best = -2.0
    best_j = 0
    for k in range(n):
        if k == i:
            d = -1.0
        else:
            d = fabs(E[k] - Ei)
        if d > best:
            best = d
            best_j = k
    if _take_step(i, best_j, K, y, C, alpha, E, b):
        return 1
    state[0] = _next_state(state[0])
    start = <Py_ssize_t>(((state[0] * _MULT)) % (<unsigned long long>n))
    for k in range(n):
        j = (start + k) % n
        if j == i:
            continue
        if _take_step(i, j, K, y, C, alpha, E, b):
            return 1
    return 0


def solve(K, y, C, tol, max_passes, max_sweeps, seed):
    """Run SMO sweeps until `max_passes` consecutive violation-free sweeps
    (with exact error refresh between them) or the sweep cap.

    Returns (alpha, bias, sweeps_used, converged_flag).
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] K_arr = np.ascontiguousarray(K, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] y_arr = np.ascontiguousarray(y, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] C_arr = np.ascontiguousarray(C, dtype=np.float64)
    cdef Py_ssize_t n = K_arr.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] alpha_arr = np.zeros(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] E_arr = -y_arr.copy()

    cdef double[:, ::1] K_v = K_arr
    cdef double[::1] y_v = y_arr
    cdef double[::1] C_v = C_arr
    cdef double[::1] alpha_v = alpha_arr
    cdef double[::1] E_v = E_arr

    cdef double b = 0.0
    cdef double tol_c = tol
    cdef int max_passes_c = max_passes
    cdef long long max_sweeps_c = max_sweeps
    cdef unsigned long long state
    cdef int quiet = 0
    cdef long long sweeps = 0
    cdef int n_changed, converged = 0
    cdef Py_ssize_t i
    cdef double r

    state = (<unsigned long long>seed) + _MIX
    if state == 0:
        state = _MIX

    while sweeps < max_sweeps_c:
        sweeps += 1
        n_changed = 0
        with nogil:
            for i in range(n):
                r = y_v[i] * E_v[i]
                if (r < -tol_c and alpha_v[i] < C_v[i]) or (r > tol_c and alpha_v[i] > 0.0):
                    n_changed += _examine(i, K_v, y_v, C_v, alpha_v, E_v, &b, &state)
        if n_changed > 0:
            quiet = 0
            continue
        b = _refresh(K_arr, y_arr, C_arr, alpha_arr, E_arr, b)
        quiet += 1
        if quiet >= max_passes_c:
            converged = 1
            break

    return alpha_arr, float(b), int(sweeps), int(converged)
