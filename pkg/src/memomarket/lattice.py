"""Lattice coefficient tables shared by simulation and market analysis.

For a kernel with weight y(t, u) and a lattice of N periods per unit time
over horizon T (m = floor(NT) steps), the table holds

    y[n][i]   = y(n/N, i/N)                for 1 <= i <= n <= m,
    w[n][i]   = N * (y(n/N, i/N) - y((n-1)/N, i/N))
              = -N * int_{(n-1)/N}^{n/N} l(s, i/N) ds   for 1 <= i < n,

plus per-row absolute sums of w.  The w rows are the per-step drift
weights of the binary market in N-scaled form: the no-arbitrage inequality
at step n compares |sum_i w[n][i] xi_i - shift| against the integer
threshold N, which keeps exactly-representable kernels (constant c, p = 0)
exact through every downstream predicate.

Storage is triangular row-major (about 8 * m^2 / 2 bytes for y), which
caps practical tables near 2e4 steps; the recursion engines avoid
materializing tables entirely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .kernels import KernelModel

MAX_TABLE_STEPS = 20_000


def lattice_steps(n: int, t: float) -> int:
    """floor(n*t) with a guard against sub-1e-9 floating undershoot of an
    integer product (e.g. 10 * 0.7 = 6.999...)."""
    x = n * t
    k = math.floor(x)
    if (k + 1) - x < 1e-9 * max(1.0, abs(x)):
        k += 1
    return k


@dataclass(frozen=True)
class LatticeConfig:
    """Periods per unit time and horizon; grid points are i/n, i = 0..m."""

    n: int
    T: float

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"periods per unit time must be >= 1, got {self.n}")
        if not self.T > 0.0:
            raise DomainError(f"horizon must be positive, got {self.T}")
        if self.steps < 1:
            raise DomainError(f"lattice n={self.n}, T={self.T} has no steps")

    @property
    def steps(self) -> int:
        return lattice_steps(self.n, self.T)


@dataclass(frozen=True)
class CoefficientTable:
    N: int
    T: float
    m: int
    y_flat: np.ndarray       # y rows, row n at offset n(n-1)/2, length n
    w_flat: np.ndarray       # w rows, row n at offset (n-1)(n-2)/2, length n-1
    w_offsets: np.ndarray    # int64, w_offsets[n] = (n-1)(n-2)/2
    row_abs_w: np.ndarray    # row_abs_w[n] = sum_i |w[n][i]|, index 0 unused
    lipschitz: float

    def y(self, n: int, i: int) -> float:
        self._check(n, i, diag=True)
        return float(self.y_flat[n * (n - 1) // 2 + i - 1])

    def y_row(self, n: int) -> np.ndarray:
        off = n * (n - 1) // 2
        return self.y_flat[off : off + n]

    def w(self, n: int, i: int) -> float:
        self._check(n, i, diag=False)
        return float(self.w_flat[self.w_offsets[n] + i - 1])

    def w_row(self, n: int) -> np.ndarray:
        off = int(self.w_offsets[n])
        return self.w_flat[off : off + n - 1]

    def delta(self, n: int, i: int) -> float:
        """Unscaled weight increment y(n/N, i/N) - y((n-1)/N, i/N)."""
        return self.w(n, i) / self.N

    def delta_row(self, n: int) -> np.ndarray:
        return self.w_row(n) / self.N

    def row_abs_sum(self, n: int) -> float:
        """sum_i |delta[n][i]|, bounded by lipschitz * (n-1)/N."""
        return float(self.row_abs_w[n]) / self.N

    def _check(self, n: int, i: int, diag: bool) -> None:
        hi = n if diag else n - 1
        if not (1 <= n <= self.m and 1 <= i <= hi):
            raise DomainError(f"index (n={n}, i={i}) outside table of {self.m} steps")


def build_coefficient_table(kernel: KernelModel, N: int, T: float) -> CoefficientTable:
    """Tabulate y and the scaled step weights w on the m-step lattice."""
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    if not (0.0 < T <= kernel.horizon * (1.0 + 1e-12)):
        raise DomainError(f"T={T} outside (0, {kernel.horizon}]")
    m = lattice_steps(N, T)
    if m < 1:
        raise DomainError(f"lattice N={N}, T={T} has no steps")
    if m > MAX_TABLE_STEPS:
        raise DomainError(
            f"table would need {m} steps (> {MAX_TABLE_STEPS}); "
            "use the recursion engine instead"
        )

    y_flat = np.empty(m * (m + 1) // 2, dtype=np.float64)
    w_flat = np.empty(m * (m - 1) // 2, dtype=np.float64)
    w_offsets = np.zeros(m + 1, dtype=np.int64)
    row_abs_w = np.zeros(m + 1, dtype=np.float64)

    for n in range(1, m + 1):
        u = np.arange(1, n + 1, dtype=np.float64) / N
        y_off = n * (n - 1) // 2
        y_flat[y_off : y_off + n] = kernel.y_row(n / N, u)
        w_off = (n - 1) * (n - 2) // 2
        w_offsets[n] = w_off
        w_row = kernel.step_weights(N, n)
        w_flat[w_off : w_off + n - 1] = w_row
        row_abs_w[n] = np.abs(w_row).sum()

    return CoefficientTable(
        N=N,
        T=T,
        m=m,
        y_flat=y_flat,
        w_flat=w_flat,
        w_offsets=w_offsets,
        row_abs_w=row_abs_w,
        lipschitz=kernel.lipschitz,
    )
