"""Pure-Python/numpy implementations of the hot kernels.

Reference semantics for the compiled extension ``_core``; the two are
interchangeable behind ``_backend``.  Every routine here is deterministic
and allocation-light so that results never depend on chunking or worker
count.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND_NAME = "pure"


def y_fast_increments(
    g_lat: np.ndarray,
    decay: float,
    c_scaled: float,
    inv_sqrt_n: float,
    n_periods: int,
    xi: np.ndarray,
):
    """One path of noise increments dY_n via the O(1)-per-step recursion.

    Returns (dY, ops) where ops counts inner-loop iterations; the caller
    can assert ops == len(xi) to pin the engine's linear cost.
    """
    m = xi.shape[0]
    c_r = c_scaled / n_periods
    out = np.empty(m, dtype=np.float64)
    r = 0.0
    ops = 0
    for n in range(m):
        x = xi[n]
        out[n] = inv_sqrt_n * (x + c_r * r)
        r = decay * r + g_lat[n] * x
        ops += 1
    return out, ops


def first_violation_recursive(
    g_lat: np.ndarray,
    decay: float,
    c_scaled: float,
    shift: float,
    threshold: float,
    xi_block: np.ndarray,
) -> np.ndarray:
    """First violating step per path for recursion-form kernels.

    Violation at step n means |c_scaled * R_{n-1} - shift| >= threshold;
    returns int32 first steps, 0 for paths with no violation.  xi_block has
    shape (paths, m-1): only the prefix innovations matter.
    """
    paths, cols = xi_block.shape
    m = cols + 1
    r = np.zeros(paths, dtype=np.float64)
    first = np.zeros(paths, dtype=np.int32)
    for n in range(1, m + 1):
        drift = c_scaled * r
        hit = (np.abs(drift - shift) >= threshold) & (first == 0)
        if hit.any():
            first[hit] = n
        if n < m:
            x = xi_block[:, n - 1]
            r = decay * r + g_lat[n - 1] * x
    return first


def first_violation_table(
    w_flat: np.ndarray,
    w_offsets: np.ndarray,
    m: int,
    shift: float,
    threshold: float,
    xi_block: np.ndarray,
) -> np.ndarray:
    """Table-driven variant of first_violation_recursive (generic kernels)."""
    paths = xi_block.shape[0]
    first = np.zeros(paths, dtype=np.int32)
    for n in range(1, m + 1):
        off = w_offsets[n]
        w = w_flat[off : off + n - 1]
        drift = xi_block[:, : n - 1] @ w if n > 1 else np.zeros(paths)
        hit = (np.abs(drift - shift) >= threshold) & (first == 0)
        if hit.any():
            first[hit] = n
    return first


def exact_pn_dfs(
    w_flat: np.ndarray,
    w_offsets: np.ndarray,
    m: int,
    shift: float,
    threshold: float,
):
    """Exact violation probability by depth-first prefix enumeration.

    Walks the binary tree of innovation prefixes; at a node of depth k it
    tests step k+1 and, on violation, adds the prefix mass 2**-k and
    prunes.  Masses are dyadic so the accumulated probability is exact.
    Returns (p, hist) with hist[n] the mass whose first violation is at
    step n.
    """
    hist = np.zeros(m + 1, dtype=np.float64)
    xi = np.zeros(m, dtype=np.float64)
    phase = np.zeros(m, dtype=np.int8)
    p_total = 0.0
    k = 0
    while True:
        off = w_offsets[k + 1]
        drift = float(w_flat[off : off + k] @ xi[:k]) if k else 0.0
        violated = abs(drift - shift) >= threshold
        if violated:
            mass = math.ldexp(1.0, -k)
            p_total += mass
            hist[k + 1] += mass
        if not violated and k + 1 < m:
            phase[k] = 1
            xi[k] = -1.0
            k += 1
            continue
        # backtrack to the deepest level still holding an untried +1 branch
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
    return p_total, hist
