"""The m-period binary market and its no-arbitrage certificate.

Market M over m = floor(NT) steps: money market B_n = B_{n-1} (1 + r/N)
and stock S_n = S_{n-1} (1 + b/N + X_n), where the stock move
X_n = sigma * dY_{n/N} takes, given the innovation prefix, exactly the two
values

    d_n = mu_n - sigma/sqrt(N),   u_n = mu_n + sigma/sqrt(N),
    mu_n = (sigma/sqrt(N)) * sum_{i<n} delta[n][i] xi_i,

with delta the table's weight increments.  The market is free of
arbitrage iff d_n < (r - b)/N < u_n at every step along every prefix.

All predicates are evaluated in N-scaled form: with drift_n =
sum_i w[n][i] xi_i (w = N * delta) and shift = (r - b) sqrt(N) / sigma,
the step-n inequality is |drift_n - shift| < N.  Scaling by the positive
factor sigma / N^(3/2) converts scaled margins back to price units, and
exactly representable kernels stay exact through the comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError, NumericalRegimeError, PreconditionError
from .lattice import CoefficientTable, lattice_steps


@dataclass(frozen=True)
class MarketParams:
    """Periods per unit time N, horizon T, money rate r, stock drift b,
    volatility sigma and initial price s0."""

    N: int
    T: float
    r: float
    b: float
    sigma: float
    s0: float

    def __post_init__(self):
        if self.N < 1:
            raise DomainError(f"N must be >= 1, got {self.N}")
        if not self.T > 0.0:
            raise DomainError(f"T must be positive, got {self.T}")
        if not self.sigma > 0.0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")
        if not self.s0 > 0.0:
            raise DomainError(f"s0 must be positive, got {self.s0}")
        if self.steps < 1:
            raise DomainError(f"market N={self.N}, T={self.T} has no steps")

    @property
    def steps(self) -> int:
        return lattice_steps(self.N, self.T)

    @property
    def rate_step(self) -> float:
        return self.r / self.N

    @property
    def drift_step(self) -> float:
        return self.b / self.N

    @property
    def rho(self) -> float:
        """Per-step rate gap (r - b)/N, the centre of the no-arbitrage band."""
        return (self.r - self.b) / self.N

    @cached_property
    def half_spread(self) -> float:
        return self.sigma / math.sqrt(self.N)

    @cached_property
    def shift_scaled(self) -> float:
        """(r - b) sqrt(N) / sigma: rho in drift-sum units."""
        return (self.r - self.b) * math.sqrt(self.N) / self.sigma

    @property
    def margin_unit(self) -> float:
        """Converts scaled margins (threshold N) to price units (sigma/sqrt(N))."""
        return self.half_spread / self.N


def _require_match(table: CoefficientTable, params: MarketParams) -> None:
    if table.N != params.N or table.m != params.steps:
        raise DomainError(
            f"table ({table.N} periods, {table.m} steps) does not match "
            f"market ({params.N} periods, {params.steps} steps)"
        )


@dataclass(frozen=True)
class StepBounds:
    """The two admissible stock moves at one step, given a prefix.

    d and u are derived from the stored (mu, half_spread), which makes the
    spread identity u - d = 2 sigma/sqrt(N) structural: the width can never
    depend on the prefix.
    """

    n: int
    mu: float
    half_spread: float

    @property
    def d(self) -> float:
        return self.mu - self.half_spread

    @property
    def u(self) -> float:
        return self.mu + self.half_spread


def step_bounds(
    table: CoefficientTable, params: MarketParams, prefix: np.ndarray, n: int | None = None
) -> StepBounds:
    """Bounds d_n/u_n for step n from the innovation prefix xi_1..xi_{n-1}.

    If n is omitted it is len(prefix) + 1.  mu_1 = 0 for the empty prefix.
    """
    _require_match(table, params)
    prefix = np.asarray(prefix, dtype=np.float64)
    if n is None:
        n = prefix.shape[0] + 1
    if not (1 <= n <= table.m):
        raise DomainError(f"step {n} outside 1..{table.m}")
    if prefix.shape[0] < n - 1:
        raise DomainError(f"need at least {n - 1} prefix innovations, got {prefix.shape[0]}")
    drift = float(table.w_row(n) @ prefix[: n - 1]) if n > 1 else 0.0
    mu = params.half_spread * (drift / params.N)
    return StepBounds(n=n, mu=mu, half_spread=params.half_spread)


@dataclass(frozen=True)
class NoArbitrageCertificate:
    """Worst-case margins per step; free iff every margin is positive.

    margin[n] = sigma/sqrt(N) - (|rho| + (sigma/sqrt(N)) * sum_i |delta[n][i]|)
    is the distance between the rate gap and the nearest admissible move
    under the adversarial prefix; margins[k] stores step k+1.
    """

    free: bool
    margins: np.ndarray
    min_margin: float
    argmin_step: int
    N0: int | None = None

    @property
    def verdict(self) -> str:
        return "free" if self.free else "arbitrage"

    def to_dict(self) -> dict:
        out = {
            "verdict": self.verdict,
            "min_margin": self.min_margin,
            "argmin_step": self.argmin_step,
            "margins": [float(v) for v in self.margins],
        }
        if self.N0 is not None:
            out["N0"] = self.N0
        return out


def certify_no_arbitrage(
    table: CoefficientTable, params: MarketParams, N0: int | None = None
) -> NoArbitrageCertificate:
    """Exact no-arbitrage check (all steps, all prefixes at once).

    Because mu_n ranges symmetrically over +-(sigma/sqrt(N)) * row_abs_sum[n]
    as the prefix signs vary, the worst case of |mu_n - rho| is
    |rho| + (sigma/sqrt(N)) * row_abs_sum[n], and the market is free iff
    that stays strictly below sigma/sqrt(N) at every step.  Boundary
    equality counts as arbitrage.
    """
    _require_match(table, params)
    m = table.m
    scaled = params.N - (abs(params.shift_scaled) + table.row_abs_w[1 : m + 1])
    margins = scaled * params.margin_unit
    k = int(np.argmin(scaled))
    return NoArbitrageCertificate(
        free=bool(scaled[k] > 0.0),
        margins=margins,
        min_margin=float(margins[k]),
        argmin_step=k + 1,
        N0=N0,
    )


def min_periods_no_arbitrage(params: MarketParams, lipschitz_c: float) -> int:
    """Smallest N0 such that for every N >= N0 both sufficiency conditions

        b/N - (sigma/sqrt(N)) (TC + 1) > -1,
        |r - b| < sqrt(N) (1 - TC) sigma,

    hold, guaranteeing an arbitrage-free market.  Requires T < 1/C.
    """
    T, r, b, sigma = params.T, params.r, params.b, params.sigma
    c = float(lipschitz_c)
    if c < 0.0:
        raise DomainError(f"Lipschitz constant must be nonnegative, got {c}")
    tc = T * c
    if not tc < 1.0:
        raise PreconditionError(
            f"T*C = {tc} >= 1: the sufficient condition is unavailable "
            "(the exact certificate still applies)"
        )

    def cond1(n: int) -> bool:
        return b / n - (sigma / math.sqrt(n)) * (tc + 1.0) > -1.0

    def cond2(n: int) -> bool:
        return abs(r - b) < math.sqrt(n) * (1.0 - tc) * sigma

    # cond1 in x = 1/sqrt(N): h(x) = b x^2 - sigma (TC+1) x + 1 > 0.  Its
    # failure region {h <= 0} is one interval of x, hence one integer
    # interval of N; scan down from just above the analytic upper root.
    a_lin = sigma * (tc + 1.0)
    hi_x = None  # largest x with h(x) = 0, if any positive root exists
    if b == 0.0:
        hi_x = 1.0 / a_lin if a_lin > 0.0 else None
    else:
        disc = a_lin * a_lin - 4.0 * b
        if disc >= 0.0:
            root1 = (a_lin - math.sqrt(disc)) / (2.0 * b)
            root2 = (a_lin + math.sqrt(disc)) / (2.0 * b)
            pos = [x for x in (root1, root2) if x > 0.0]
            hi_x = min(pos) if pos else None  # smaller positive root bounds N above
    n1 = 1
    if hi_x is not None and hi_x > 0.0:
        start = max(1, math.floor(1.0 / (hi_x * hi_x))) + 2
        n = start
        while n >= 1:
            if not cond1(n):
                n1 = n + 1
                break
            n -= 1
    # cond2 is monotone increasing in N.
    gap = abs(r - b)
    denom = (1.0 - tc) * sigma
    n2 = max(1, math.floor((gap / denom) ** 2)) if gap > 0.0 else 1
    while not cond2(n2):
        n2 += 1
    while n2 > 1 and cond2(n2 - 1):
        n2 -= 1
    return max(n1, n2)


def evolve_market(table: CoefficientTable, params: MarketParams, xi: np.ndarray):
    """Money-market and stock paths (B, S) for one innovation sequence.

    B[n] = (1 + r/N)^n; S follows the step recursion with the move
    assembled from the step bounds (d or u picked by the innovation sign).
    """
    _require_match(table, params)
    xi = np.asarray(xi, dtype=np.float64)
    m = table.m
    if xi.shape[0] < m:
        raise DomainError(f"need {m} innovations, got {xi.shape[0]}")
    bfac = 1.0 + params.rate_step
    B = np.empty(m + 1)
    B[0] = 1.0
    np.cumprod(np.full(m, bfac), out=B[1:])
    S = np.empty(m + 1)
    S[0] = params.s0
    hs = params.half_spread
    for n in range(1, m + 1):
        drift = float(table.w_row(n) @ xi[: n - 1]) if n > 1 else 0.0
        x = hs * (drift / params.N) + xi[n - 1] * hs
        factor = 1.0 + params.drift_step + x
        if factor <= 0.0:
            raise NumericalRegimeError(
                f"price factor {factor} <= 0 at step {n}", step=n
            )
        S[n] = S[n - 1] * factor
    return B, S


def risk_neutral_step_prob(bounds: StepBounds, params: MarketParams) -> float:
    """One-step weight q = (rho - d)/(u - d) in (0, 1) making the expected
    move equal the rate gap: q*u + (1-q)*d = rho.  Requires d < rho < u."""
    rho = params.rho
    if not (bounds.d < rho < bounds.u):
        raise NumericalRegimeError(
            f"step {bounds.n} admits arbitrage: d={bounds.d}, rho={rho}, u={bounds.u}",
            step=bounds.n,
        )
    return (rho - bounds.d) / (bounds.u - bounds.d)
