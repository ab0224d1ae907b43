"""Arbitrage quantification: exact and Monte Carlo violation probability,
decay fitting, and the explicit one-step strategy witness.

The violation event at step n is the complement of the open no-arbitrage
band: |drift_n - shift| >= N in the scaled units of ``market`` (boundary
equality counts as a violation).  The probability that a random innovation
path violates at some step is measured two ways:

* exactly, by depth-first enumeration of sign prefixes with
  first-violation pruning (each pruned prefix of length k carries dyadic
  mass 2**-k, so the result is exact);
* by Monte Carlo over per-path innovation streams, with a Wilson score
  interval; trials are partitioned into fixed-size blocks so the estimate
  is identical for any worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import ndtri

from . import _backend
from .errors import (
    AllZeroDecayError,
    DomainError,
    NoViolationError,
    PreconditionError,
)
from .kernels import KernelModel
from .lattice import CoefficientTable
from .market import MarketParams, _require_match, evolve_market, step_bounds
from .parallel import map_chunks
from .rng import RADEMACHER, innovation_matrix

ENUMERATION_BUDGET = 26
MC_BLOCK = 8192


@dataclass(frozen=True)
class ArbitrageReport:
    """Violation probability estimate plus its first-violation histogram."""

    mode: str                      # "exact" | "monte-carlo"
    p_hat: float
    ci_low: float
    ci_high: float
    trials: int
    first_violation_histogram: dict[int, float]

    def to_dict(self, config_echo: dict | None = None) -> dict:
        out = {
            "mode": self.mode,
            "p_hat": self.p_hat,
            "ci": [self.ci_low, self.ci_high],
            "trials": self.trials,
            "histogram": {str(k): v for k, v in sorted(self.first_violation_histogram.items())},
        }
        if config_echo is not None:
            out["config_echo"] = config_echo
        return out


@dataclass(frozen=True)
class StrategyWitness:
    """One-step arbitrage: the prefix that produces it, the step, and the
    per-bond-unit payoffs of the financed stock position on both
    continuations (both nonnegative, at least one positive)."""

    prefix: tuple[int, ...]
    step: int
    direction: str                 # "long-stock" | "short-stock"
    stake: float                   # bond units shorted (long) or received (short)
    payoff_down: float
    payoff_up: float

    def to_dict(self) -> dict:
        return {
            "prefix": list(self.prefix),
            "step": self.step,
            "direction": self.direction,
            "stake": self.stake,
            "payoff_down": self.payoff_down,
            "payoff_up": self.payoff_up,
        }


def wilson_interval(successes: int, trials: int, confidence: float = 0.95):
    """Wilson score interval; preferred near p = 0, the regime of interest."""
    if trials < 1:
        raise DomainError("trials must be >= 1")
    z = float(ndtri(0.5 + confidence / 2.0))
    p = successes / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2.0 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials)) / denom
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == trials else min(1.0, centre + half)
    return lo, hi


def first_violation_step(
    table: CoefficientTable, params: MarketParams, xi: np.ndarray
) -> int | None:
    """Smallest step at which this innovation path violates, else None."""
    _require_match(table, params)
    xi = np.asarray(xi, dtype=np.float64)
    if xi.shape[0] < table.m - 1:
        raise DomainError(f"need at least {table.m - 1} innovations, got {xi.shape[0]}")
    shift = params.shift_scaled
    thr = float(params.N)
    for n in range(1, table.m + 1):
        drift = float(table.w_row(n) @ xi[: n - 1]) if n > 1 else 0.0
        if abs(drift - shift) >= thr:
            return n
    return None


def violation_probability_exact(
    table: CoefficientTable,
    params: MarketParams,
    max_steps_budget: int = ENUMERATION_BUDGET,
) -> ArbitrageReport:
    """Exact violation probability by pruned prefix enumeration."""
    _require_match(table, params)
    if table.m > max_steps_budget:
        raise PreconditionError(
            f"{table.m} steps exceed the enumeration budget {max_steps_budget}; "
            "use violation_probability_mc"
        )
    p, hist = _backend.exact_pn_dfs(
        table.w_flat, table.w_offsets, table.m, params.shift_scaled, float(params.N)
    )
    histogram = {n: float(hist[n]) for n in range(1, table.m + 1) if hist[n] != 0.0}
    return ArbitrageReport(
        mode="exact",
        p_hat=float(p),
        ci_low=float(p),
        ci_high=float(p),
        trials=0,
        first_violation_histogram=histogram,
    )


def violation_probability_mc(
    kernel: KernelModel,
    params: MarketParams,
    trials: int,
    seed: int,
    workers: int = 1,
    table: CoefficientTable | None = None,
    stream_start: int = 0,
) -> ArbitrageReport:
    """Monte Carlo violation probability with a 95% Wilson interval.

    Path j draws from innovation stream stream_start + j, and paths are
    scanned in fixed blocks of MC_BLOCK, so the tally is identical for any
    worker count.  Kernels with a one-step recursion are scanned in O(m)
    per path; other kernels fall back to their coefficient table.
    """
    if trials < 1:
        raise DomainError("trials must be >= 1")
    m = params.steps
    recursive = hasattr(kernel, "recursion_coefficients")
    if recursive:
        g_lat, decay, c_scaled = kernel.recursion_coefficients(params.N, m)
    else:
        from .lattice import build_coefficient_table

        if table is None:
            table = build_coefficient_table(kernel, params.N, params.T)
        _require_match(table, params)
    shift = params.shift_scaled
    thr = float(params.N)

    def scan(start: int, count: int) -> np.ndarray:
        xi = innovation_matrix(RADEMACHER, seed, stream_start + start, count, m - 1)
        if recursive:
            first = _backend.first_violation_recursive(g_lat, decay, c_scaled, shift, thr, xi)
        else:
            first = _backend.first_violation_table(
                table.w_flat, table.w_offsets, m, shift, thr, xi
            )
        return np.bincount(first, minlength=m + 1).astype(np.int64)

    counts = sum(map_chunks(scan, trials, MC_BLOCK, workers))
    hits = int(counts[1:].sum())
    p_hat = hits / trials
    lo, hi = wilson_interval(hits, trials)
    histogram = {
        n: int(counts[n]) / trials for n in range(1, m + 1) if counts[n]
    }
    return ArbitrageReport(
        mode="monte-carlo",
        p_hat=p_hat,
        ci_low=lo,
        ci_high=hi,
        trials=trials,
        first_violation_histogram=histogram,
    )


def min_periods_for_decay(alpha: float, params: MarketParams, lipschitz_c: float) -> int:
    """Smallest period count from which the N**-alpha decay bound machinery
    applies: with beta = (alpha+1)/2, both

        N**(beta/2) * C * sqrt(T) < sqrt(N) - |(r-b)/sigma|,
        N**(beta/2) > 4

    must hold from that point on.  Such an N always exists since
    beta/2 < 1/2.
    """
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    beta = (alpha + 1.0) / 2.0
    half_beta = beta / 2.0
    c_rt = float(lipschitz_c) * math.sqrt(params.T)
    gap = abs((params.r - params.b) / params.sigma)

    def cond_a(n: int) -> bool:
        return n**half_beta * c_rt < math.sqrt(n) - gap

    def cond_b(n: int) -> bool:
        return n**half_beta > 4.0

    # f(N) = sqrt(N) - c_rt * N**(beta/2) - gap decreases then increases;
    # its minimum sits at (beta * c_rt)**(2/(1-beta)).
    if c_rt > 0.0:
        lo = max(1, math.ceil((beta * c_rt) ** (2.0 / (1.0 - beta))))
    else:
        lo = 1
    if cond_a(lo):
        n_a = 1
    else:
        hi = lo
        while not cond_a(hi):
            hi *= 2
        # cond_a is monotone on [lo, hi]: bisect for the first success.
        low, high = lo, hi
        while high - low > 1:
            mid = (low + high) // 2
            if cond_a(mid):
                high = mid
            else:
                low = mid
        n_a = high
    n_b = max(1, math.floor(4.0 ** (1.0 / half_beta)))
    while not cond_b(n_b):
        n_b += 1
    while n_b > 1 and cond_b(n_b - 1):
        n_b -= 1
    return max(n_a, n_b)


@dataclass(frozen=True)
class DecayFit:
    slope: float
    intercept: float
    residuals: tuple[float, ...]
    used_points: tuple[tuple[int, float], ...]


def fit_decay(points: Sequence[tuple[int, float]]) -> DecayFit:
    """Least-squares fit of log p against log N over the positive points.

    Needs at least three positive probabilities; an all-zero sweep raises
    AllZeroDecayError (decay already complete on the tested range).
    """
    pos = [(int(n), float(p)) for n, p in points if p > 0.0]
    if not pos:
        raise AllZeroDecayError("all probabilities are zero on the tested range")
    if len(pos) < 3:
        raise DomainError(f"need >= 3 positive points for a decay fit, got {len(pos)}")
    x = np.log([n for n, _ in pos])
    y = np.log([p for _, p in pos])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return DecayFit(
        slope=float(slope),
        intercept=float(intercept),
        residuals=tuple(float(r) for r in resid),
        used_points=tuple(pos),
    )


def extract_strategy(
    table: CoefficientTable, params: MarketParams, prefix: np.ndarray, n: int
) -> StrategyWitness:
    """Build the one-step arbitrage at step n for a violating prefix.

    If d_n >= rho: at step n-1 short one bond unit and hold the proceeds in
    stock; both continuations return at least the money rate (payoff per
    bond unit is X_n - rho >= 0) and the up branch is strictly positive.
    If u_n <= rho the mirrored stock-short witness applies.
    """
    _require_match(table, params)
    prefix = np.asarray(prefix, dtype=np.float64)
    if prefix.shape[0] < n - 1:
        raise DomainError(f"need {n - 1} prefix innovations, got {prefix.shape[0]}")
    drift = float(table.w_row(n) @ prefix[: n - 1]) if n > 1 else 0.0
    shift = params.shift_scaled
    unit = params.margin_unit
    if drift - shift >= params.N:           # d_n >= rho
        direction = "long-stock"
        pay_down = (drift - shift - params.N) * unit
        pay_up = (drift - shift + params.N) * unit
    elif shift - drift >= params.N:         # u_n <= rho
        direction = "short-stock"
        pay_down = (shift - drift + params.N) * unit
        pay_up = (shift - drift - params.N) * unit
    else:
        raise NoViolationError(f"no violation at step {n} for this prefix")
    return StrategyWitness(
        prefix=tuple(int(v) for v in prefix[: n - 1]),
        step=n,
        direction=direction,
        stake=1.0,
        payoff_down=pay_down,
        payoff_up=pay_up,
    )


def verify_strategy(
    witness: StrategyWitness, table: CoefficientTable, params: MarketParams
) -> bool:
    """Independent recheck: re-simulate both one-step continuations through
    the market recursion and confirm the witness payoffs.

    Returns True iff the simulated per-bond-unit payoffs are nonnegative
    with at least one strictly positive and agree with the stored ones.
    """
    n = witness.step
    if not (1 <= n <= table.m) or len(witness.prefix) != n - 1:
        return False
    sims = []
    for branch in (-1.0, 1.0):
        xi = np.zeros(table.m)
        xi[: n - 1] = witness.prefix
        xi[n - 1] = branch
        try:
            B, S = evolve_market(table, params, xi)
        except Exception:
            return False
        growth = S[n] / S[n - 1] - B[n] / B[n - 1]
        sims.append(growth if witness.direction == "long-stock" else -growth)
    pay_down, pay_up = sims
    tol = 1e-9
    if abs(pay_down - witness.payoff_down) > tol or abs(pay_up - witness.payoff_up) > tol:
        return False
    lo = min(pay_down, pay_up)
    hi = max(pay_down, pay_up)
    return bool(lo >= -1e-12 and hi > 1e-12)


def worst_case_prefix(table: CoefficientTable, params: MarketParams):
    """The adversarial prefix and step realizing the certificate's worst
    margin: signs are chosen to push the drift sum away from the rate gap.

    Returns (prefix, step) where step is the first step whose worst-case
    inequality is violated, or None if the market is free.
    """
    shift = params.shift_scaled
    away = -1.0 if shift >= 0.0 else 1.0
    for n in range(1, table.m + 1):
        w = table.w_row(n)
        signs = np.where(w >= 0.0, away, -away)
        drift = float(w @ signs)
        if abs(drift - shift) >= params.N:
            prefix = np.zeros(table.m - 1)
            prefix[: n - 1] = signs
            if n < table.m:
                prefix[n - 1 :] = 1.0
            return prefix, n
    return None
