"""Volterra kernels and their integrated weight functions.

A kernel here is a bounded measurable function l(t, s) on [0, T]^2 that
vanishes above the diagonal (s > t).  Everything downstream is driven by
its time integral and the induced weight

    z(t, u) = int_u^t l(s, u) ds          (0 for u > t),
    y(t, u) = 1 - z(t, u),

together with two constants: M, an upper bound for sup |l|, and the
time-Lipschitz constant C of z(., u), for which M itself is the canonical
choice because z is an integral of l over an interval of length |t1 - t2|.

Two concrete kernels are provided:

* ``MemoryKernel`` - the exponential-memory kernel

      l(t, s) = p * exp(-(p+q)(t-s)) * g(s),
      g(s)    = 1 - 2pq / ((2q+p)^2 * exp(2qs) - p^2),

  with rates q > 0 and p > -q.  Its z has the closed form
  (p/(p+q)) * g(u) * (1 - exp(-(p+q)(t-u))), which is cross-checked in the
  test suite against adaptive quadrature of l.
* ``ConstantKernel`` - l = c on the lower triangle, the minimal kernel with
  a uniform positive floor; z(t, u) = c*(t - u).  Mostly a test harness,
  and the standard way to drive the market into the arbitrage regime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigError, DomainError
from .quadrature import adaptive_simpson

_DOMAIN_SLACK = 1e-12


@dataclass(frozen=True)
class MemoryKernelParams:
    """Rates (p, q) of the exponential-memory kernel plus the horizon T.

    Constraints: q > 0, p > -q (so p + q > 0) and T > 0.  Under these the
    denominator of g, (2q+p)^2 * exp(2qs) - p^2, is at least
    4q(q+p) > 0 for s >= 0, so g is always well defined.
    """

    p: float
    q: float
    horizon: float

    def __post_init__(self):
        if not (self.q > 0.0):
            raise DomainError(f"q must be positive, got {self.q}")
        if not (self.p > -self.q):
            raise DomainError(f"p must exceed -q, got p={self.p}, q={self.q}")
        if not (self.horizon > 0.0):
            raise DomainError(f"horizon must be positive, got {self.horizon}")


class KernelModel:
    """Base kernel: pointwise l, integrated z, weight y and their bounds.

    Subclasses must implement ``l`` and should override ``z`` with a closed
    form when one exists; the base ``z`` falls back to adaptive quadrature.
    All instances are immutable after construction and every method is a
    pure function, so unrestricted concurrent use is safe.
    """

    def __init__(self, horizon: float):
        if not horizon > 0.0:
            raise DomainError(f"horizon must be positive, got {horizon}")
        self.horizon = float(horizon)

    # -- domain ----------------------------------------------------------

    def _check_domain(self, *values: float) -> None:
        lo = -_DOMAIN_SLACK
        hi = self.horizon * (1.0 + _DOMAIN_SLACK) + _DOMAIN_SLACK
        for v in values:
            if not (lo <= v <= hi):
                raise DomainError(
                    f"time argument {v} outside [0, {self.horizon}]"
                )

    # -- pointwise values -------------------------------------------------

    def l(self, t: float, s: float) -> float:
        raise NotImplementedError

    def z(self, t: float, u: float) -> float:
        """Integrated kernel; 0 above the diagonal (u > t)."""
        self._check_domain(t, u)
        if u >= t:
            return 0.0
        return self.z_by_quadrature(t, u)

    def y(self, t: float, u: float) -> float:
        return 1.0 - self.z(t, u)

    def z_by_quadrature(self, t: float, u: float, tol: float = 1e-12) -> float:
        """Quadrature value of int_u^t l(s, u) ds, the oracle for ``z``."""
        self._check_domain(t, u)
        if u >= t:
            return 0.0
        return adaptive_simpson(lambda s: self.l(s, u), u, t, tol)

    # -- vectorized rows ---------------------------------------------------

    def z_row(self, t: float, u: np.ndarray) -> np.ndarray:
        return np.array([self.z(t, float(ui)) for ui in u], dtype=float)

    def y_row(self, t: float, u: np.ndarray) -> np.ndarray:
        return 1.0 - self.z_row(t, u)

    # -- bounds ------------------------------------------------------------

    def sup_abs_bound(self, grid_points: int = 10_000) -> float:
        """Upper bound for sup |l| over the closed lower triangle.

        The base implementation scans a triangular grid plus the diagonal
        and returns the sample maximum; subclasses with analytic structure
        tighten this.  The returned value dominates every grid sample.
        """
        if grid_points < 2:
            raise DomainError("grid_points must be at least 2")
        ts = np.linspace(0.0, self.horizon, grid_points)
        best = 0.0
        for t in ts:
            for s in ts[ts <= t]:
                best = max(best, abs(self.l(float(t), float(s))))
        return best

    @cached_property
    def lipschitz(self) -> float:
        """Canonical Lipschitz constant of z(., u): the sup bound of |l|."""
        return self.sup_abs_bound()

    # -- lattice weights ----------------------------------------------------

    def step_weights(self, N: int, n: int) -> np.ndarray:
        """Scaled one-step weights w[n][i] = -N * int_{(n-1)/N}^{n/N} l(s, i/N) ds
        for i = 1..n-1, equal to N times the y-weight increment
        y(n/N, i/N) - y((n-1)/N, i/N).

        Kept in this N-scaled form so that exactly representable kernels
        (constant c, p = 0) give exactly representable weights; the market
        predicates compare these sums against the integer threshold N.
        """
        u = np.arange(1, n, dtype=float) / N
        t1 = (n - 1) / N
        t2 = n / N
        return -N * (self.z_row(t2, u) - self.z_row(t1, u))


class MemoryKernel(KernelModel):
    """Exponential-memory kernel of rates (p, q); see module docstring."""

    def __init__(self, params: MemoryKernelParams):
        super().__init__(params.horizon)
        self.params = params
        self.p = params.p
        self.q = params.q
        self.rate = params.p + params.q

    @classmethod
    def from_rates(cls, p: float, q: float, horizon: float) -> "MemoryKernel":
        return cls(MemoryKernelParams(p, q, horizon))

    def g(self, s):
        """Second-argument factor of l; scalar or ndarray."""
        if isinstance(s, (float, int)):
            denom = (2.0 * self.q + self.p) ** 2 * math.exp(2.0 * self.q * s) - self.p**2
            assert denom > 0.0
            return 1.0 - 2.0 * self.p * self.q / denom
        denom = (2.0 * self.q + self.p) ** 2 * np.exp(2.0 * self.q * np.asarray(s)) - self.p**2
        assert np.all(denom > 0.0)
        return 1.0 - 2.0 * self.p * self.q / denom

    def l(self, t: float, s: float) -> float:
        self._check_domain(t, s)
        if s > t:
            return 0.0
        return self.p * math.exp(-self.rate * (t - s)) * self.g(s)

    def z(self, t: float, u: float) -> float:
        self._check_domain(t, u)
        if u >= t or self.p == 0.0:
            return 0.0
        return (self.p / self.rate) * self.g(u) * (1.0 - math.exp(-self.rate * (t - u)))

    def z_by_quadrature(self, t: float, u: float, tol: float = 1e-12) -> float:
        """Numerical z: adaptive Simpson applied to s -> l(s, u).

        The pointwise kernel formula is evaluated afresh at every node (no
        use of the closed-form antiderivative), which keeps this the
        independent oracle for ``z``.
        """
        self._check_domain(t, u)
        if u >= t:
            return 0.0
        p, q, rate = self.p, self.q, self.rate
        a2 = (2.0 * q + p) ** 2
        p2 = p * p
        exp = math.exp

        def integrand(s: float) -> float:
            return p * exp(-rate * (s - u)) * (1.0 - 2.0 * p * q / (a2 * exp(2.0 * q * u) - p2))

        return adaptive_simpson(integrand, u, t, tol)

    def z_row(self, t: float, u: np.ndarray) -> np.ndarray:
        self._check_domain(t)
        u = np.asarray(u, dtype=float)
        below = u < t
        out = np.zeros_like(u)
        if self.p != 0.0 and below.any():
            ub = u[below]
            out[below] = (self.p / self.rate) * self.g(ub) * (
                1.0 - np.exp(-self.rate * (t - ub))
            )
        return out

    def sup_abs_bound(self, grid_points: int = 10_000) -> float:
        """sup |l| is attained on the diagonal: |l(s, s)| = |p| * |g(s)| and
        the exponential factor only shrinks off-diagonal values.  g is
        monotone in s, so the analytic candidate is |p| * max(|g(0)|, |g(T)|);
        a diagonal grid scan keeps the base-class contract that the result
        dominates every sample."""
        if grid_points < 2:
            raise DomainError("grid_points must be at least 2")
        if self.p == 0.0:
            return 0.0
        diag = np.abs(self.p * self.g(np.linspace(0.0, self.horizon, grid_points)))
        analytic = abs(self.p) * max(abs(self.g(0.0)), abs(self.g(self.horizon)))
        return max(float(diag.max()), analytic)

    def step_weights(self, N: int, n: int) -> np.ndarray:
        if n < 1:
            raise DomainError(f"step index must be >= 1, got {n}")
        i = np.arange(1, n, dtype=float)
        if self.p == 0.0:
            return np.zeros(n - 1)
        decay_step = math.exp(-self.rate / N)
        amp = -N * (self.p / self.rate) * (1.0 - decay_step)
        return amp * self.g(i / N) * np.exp(-self.rate * (n - 1 - i) / N)

    def recursion_coefficients(self, N: int, m: int):
        """Constants of the O(1)-per-step increment recursion.

        Returns (g_lat, decay, c_scaled) with g_lat[i-1] = g(i/N) for
        i = 1..m, decay = exp(-(p+q)/N) and
        c_scaled = -N * (p/(p+q)) * (1 - decay), chosen so that

            Sum_{i<n} w[n][i] * xi_i = c_scaled * R_{n-1},
            R_n = decay * R_{n-1} + g(n/N) * xi_n,   R_0 = 0,

        matches ``step_weights`` term by term.  The increment engine uses
        dY_n = (xi_n + (c_scaled/N) * R_{n-1}) / sqrt(N).
        """
        g_lat = np.asarray(self.g(np.arange(1, m + 1, dtype=float) / N), dtype=float)
        decay = math.exp(-self.rate / N)
        c_scaled = -N * (self.p / self.rate) * (1.0 - decay)
        return g_lat, decay, c_scaled


class ConstantKernel(KernelModel):
    """l = c on the closed lower triangle; z(t, u) = c * (t - u) below it."""

    def __init__(self, c: float, horizon: float):
        super().__init__(horizon)
        self.c = float(c)

    def l(self, t: float, s: float) -> float:
        self._check_domain(t, s)
        return 0.0 if s > t else self.c

    def z(self, t: float, u: float) -> float:
        self._check_domain(t, u)
        return 0.0 if u >= t else self.c * (t - u)

    def z_row(self, t: float, u: np.ndarray) -> np.ndarray:
        self._check_domain(t)
        u = np.asarray(u, dtype=float)
        return np.where(u < t, self.c * (t - u), 0.0)

    def sup_abs_bound(self, grid_points: int = 10_000) -> float:
        return abs(self.c)

    def step_weights(self, N: int, n: int) -> np.ndarray:
        if n < 1:
            raise DomainError(f"step index must be >= 1, got {n}")
        return np.full(n - 1, -self.c)

    def recursion_coefficients(self, N: int, m: int):
        """Constant-kernel counterpart of MemoryKernel.recursion_coefficients:
        no decay, unit lattice factor, R_n the plain innovation sum, and an
        exactly representable scaled coefficient -c."""
        return np.ones(m), 1.0, -self.c


def kernel_from_config(block: dict, horizon: float) -> KernelModel:
    """Build a kernel from its JSON run-config block.

    Accepted forms: {"kind": "memory", "p": .., "q": ..} and
    {"kind": "constant", "c": ..}; the horizon comes from the market block.
    """
    if not isinstance(block, dict):
        raise ConfigError("kernel block must be an object")
    kind = block.get("kind")
    if kind == "memory":
        extra = set(block) - {"kind", "p", "q"}
        if extra:
            raise ConfigError(f"unknown kernel keys: {sorted(extra)}")
        try:
            return MemoryKernel.from_rates(float(block["p"]), float(block["q"]), horizon)
        except KeyError as exc:
            raise ConfigError(f"memory kernel needs key {exc}") from exc
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc
    if kind == "constant":
        extra = set(block) - {"kind", "c"}
        if extra:
            raise ConfigError(f"unknown kernel keys: {sorted(extra)}")
        try:
            return ConstantKernel(float(block["c"]), horizon)
        except KeyError as exc:
            raise ConfigError(f"constant kernel needs key {exc}") from exc
    raise ConfigError(f"unknown kernel kind: {kind!r}")
