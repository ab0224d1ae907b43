# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: increment recursion, Monte Carlo violation scans
and the exact prefix-tree enumeration.  Semantics mirror ``_pure``; the
test suite and the backend benchmark hold the two implementations
together."""

import numpy as np

from libc.math cimport fabs, ldexp


BACKEND_NAME = "compiled"


def y_fast_increments(
    double[::1] g_lat,
    double decay,
    double c_scaled,
    double inv_sqrt_n,
    double n_periods,
    double[::1] xi,
):
    cdef Py_ssize_t m = xi.shape[0]
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] dy = out
    cdef double c_r = c_scaled / n_periods
    cdef double r = 0.0
    cdef double x
    cdef Py_ssize_t n
    for n in range(m):
        x = xi[n]
        dy[n] = inv_sqrt_n * (x + c_r * r)
        r = decay * r + g_lat[n] * x
    return out, m


def first_violation_recursive(
    double[::1] g_lat,
    double decay,
    double c_scaled,
    double shift,
    double threshold,
    double[:, ::1] xi_block,
):
    cdef Py_ssize_t paths = xi_block.shape[0]
    cdef Py_ssize_t m = xi_block.shape[1] + 1
    out = np.zeros(paths, dtype=np.int32)
    cdef int[::1] first = out
    cdef Py_ssize_t j, n
    cdef double r, drift
    for j in range(paths):
        r = 0.0
        for n in range(1, m + 1):
            drift = c_scaled * r
            if fabs(drift - shift) >= threshold:
                first[j] = <int> n
                break
            if n < m:
                r = decay * r + g_lat[n - 1] * xi_block[j, n - 1]
    return out


def first_violation_table(
    double[::1] w_flat,
    long[::1] w_offsets,
    Py_ssize_t m,
    double shift,
    double threshold,
    double[:, ::1] xi_block,
):
    cdef Py_ssize_t paths = xi_block.shape[0]
    out = np.zeros(paths, dtype=np.int32)
    cdef int[::1] first = out
    cdef Py_ssize_t j, n, i, off
    cdef double drift
    for j in range(paths):
        for n in range(1, m + 1):
            off = w_offsets[n]
            drift = 0.0
            for i in range(n - 1):
                drift += w_flat[off + i] * xi_block[j, i]
            if fabs(drift - shift) >= threshold:
                first[j] = <int> n
                break
    return out


def exact_pn_dfs(
    double[::1] w_flat,
    long[::1] w_offsets,
    Py_ssize_t m,
    double shift,
    double threshold,
):
    hist_arr = np.zeros(m + 1, dtype=np.float64)
    cdef double[::1] hist = hist_arr
    xi_arr = np.zeros(m, dtype=np.float64)
    cdef double[::1] xi = xi_arr
    phase_arr = np.zeros(m, dtype=np.int8)
    cdef signed char[::1] phase = phase_arr
    cdef double p_total = 0.0
    cdef double drift, mass
    cdef Py_ssize_t k = 0, off, i
    cdef bint violated, moved
    while True:
        off = w_offsets[k + 1]
        drift = 0.0
        for i in range(k):
            drift += w_flat[off + i] * xi[i]
        violated = fabs(drift - shift) >= threshold
        if violated:
            mass = ldexp(1.0, <int> (-k))
            p_total += mass
            hist[k + 1] += mass
        if (not violated) and k + 1 < m:
            phase[k] = 1
            xi[k] = -1.0
            k += 1
            continue
        moved = False
        while k > 0:
            k -= 1
            if phase[k] == 1:
                phase[k] = 2
                xi[k] = 1.0
                k += 1
                moved = True
                break
        if not moved:
            break
    return p_total, hist_arr
