"""Discrete path simulation: innovation walks, memory-weighted walks and
price products.

Two interchangeable engines produce the memory-weighted walk
Y[k] = (1/sqrt(N)) * sum_{i<=k} y(k/N, i/N) xi_i:

* ``sample_path_direct`` re-sums the weighted innovations from a
  coefficient table at every step (O(m^2) total) - the reference engine;
* ``sample_path_fast`` runs the O(1)-per-step increment recursion offered
  by exponential-family kernels (O(m) total) and must agree with the
  direct engine to 1e-10 in max norm.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import math

import numpy as np

from . import _backend
from .errors import DomainError, NumericalRegimeError
from .kernels import KernelModel
from .lattice import CoefficientTable, lattice_steps
from .rng import InnovationSpec, sample_innovations  # noqa: F401  (re-export)


@dataclass(frozen=True)
class DiscretePath:
    """Innovations and the processes they generate on the lattice i/N.

    W is the plain scaled innovation walk, Y the memory-weighted walk and
    S (optional) the price path attached by ``sample_prices``.  Arrays W,
    Y, S have m+1 entries (index 0 is time 0), xi has m.
    """

    N: int
    T: float
    xi: np.ndarray
    W: np.ndarray
    Y: np.ndarray
    S: np.ndarray | None = None

    @property
    def steps(self) -> int:
        return self.xi.shape[0]

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.steps + 1, dtype=np.float64) / self.N


def _walk(xi: np.ndarray, inv_sqrt_n: float) -> np.ndarray:
    w = np.empty(xi.shape[0] + 1)
    w[0] = 0.0
    np.cumsum(xi * inv_sqrt_n, out=w[1:])
    return w


def sample_path_direct(table: CoefficientTable, xi: np.ndarray) -> DiscretePath:
    """Reference engine: full weighted re-summation at every lattice step."""
    xi = np.asarray(xi, dtype=np.float64)
    if xi.shape[0] != table.m:
        raise DomainError(f"need {table.m} innovations, got {xi.shape[0]}")
    inv_sqrt_n = 1.0 / math.sqrt(table.N)
    y = np.empty(table.m + 1)
    y[0] = 0.0
    for k in range(1, table.m + 1):
        y[k] = inv_sqrt_n * float(table.y_row(k) @ xi[:k])
    return DiscretePath(N=table.N, T=table.T, xi=xi, W=_walk(xi, inv_sqrt_n), Y=y)


def sample_path_fast(kernel: KernelModel, N: int, T: float, xi: np.ndarray) -> DiscretePath:
    """Recursion engine; rejected for kernels without recursion form."""
    if not hasattr(kernel, "recursion_coefficients"):
        raise DomainError(
            f"{type(kernel).__name__} has no one-step recursion; use the direct engine"
        )
    xi = np.asarray(xi, dtype=np.float64)
    m = lattice_steps(N, T)
    if xi.shape[0] != m:
        raise DomainError(f"need {m} innovations, got {xi.shape[0]}")
    g_lat, decay, c_scaled = kernel.recursion_coefficients(N, m)
    inv_sqrt_n = 1.0 / math.sqrt(N)
    dy, _ = _backend.y_fast_increments(g_lat, decay, c_scaled, inv_sqrt_n, float(N), xi)
    y = np.empty(m + 1)
    y[0] = 0.0
    np.cumsum(dy, out=y[1:])
    return DiscretePath(N=N, T=T, xi=xi, W=_walk(xi, inv_sqrt_n), Y=y)


def sample_prices(
    path: DiscretePath,
    drift: Callable[[float], float] | float,
    sigma: float,
    s0: float,
) -> DiscretePath:
    """Attach the product price path S[k] = s0 * prod_{j<=k} (1 + sigma dY_j + b(j/N)/N).

    Every factor must stay positive; a non-positive factor raises
    NumericalRegimeError carrying the offending step, because it means the
    lattice is outside the price approximation's validity region.
    """
    if s0 <= 0.0:
        raise DomainError(f"initial price must be positive, got {s0}")
    n = path.N
    m = path.steps
    b = drift if callable(drift) else (lambda _t, _b=float(drift): _b)
    dY = np.diff(path.Y)
    bvals = np.array([b(j / n) for j in range(1, m + 1)], dtype=np.float64)
    factors = 1.0 + sigma * dY + bvals / n
    bad = np.nonzero(factors <= 0.0)[0]
    if bad.size:
        step = int(bad[0]) + 1
        raise NumericalRegimeError(
            f"price factor {factors[bad[0]]} <= 0 at step {step}", step=step
        )
    s = np.empty(m + 1)
    s[0] = s0
    np.cumprod(factors, out=s[1:])
    s[1:] *= s0
    return replace(path, S=s)


def quadratic_variation(values: np.ndarray) -> np.ndarray:
    """[X]_k = sum_{j<=k} (X_j - X_{j-1})^2; nondecreasing, [X]_0 = 0."""
    values = np.asarray(values, dtype=np.float64)
    out = np.empty(values.shape[0])
    out[0] = 0.0
    np.cumsum(np.diff(values) ** 2, out=out[1:])
    return out


def sup_jump(values: np.ndarray) -> float:
    """Largest one-step move max_k |X_k - X_{k-1}| (0 for constant paths)."""
    values = np.asarray(values, dtype=np.float64)
    if values.shape[0] < 2:
        return 0.0
    return float(np.abs(np.diff(values)).max())


def split_by_jump_threshold(path: DiscretePath, sigma: float):
    """Split Y into the small-move part Y1 (|dY| < 1/(2 sigma)) and the
    large-move remainder Y2; increments are partitioned exactly."""
    if sigma <= 0.0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    dY = np.diff(path.Y)
    small = np.abs(dY) < 0.5 / sigma
    y1 = np.zeros(path.steps + 1)
    y2 = np.zeros(path.steps + 1)
    np.cumsum(np.where(small, dY, 0.0), out=y1[1:])
    np.cumsum(np.where(small, 0.0, dY), out=y2[1:])
    return y1, y2
