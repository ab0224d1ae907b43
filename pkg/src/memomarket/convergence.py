"""Finite-lattice checks of the limit behaviour of the walk and the price.

Limits used as references:

* variance/covariance: Cov(Y_t, Y_s) -> int_0^{t^s} y(t,u) y(s,u) du, with
  the discrete side (1/n) sum_i y(floor(nt)/n, i/n) y(floor(ns)/n, i/n)
  computed exactly (no sampling);
* quadratic variation of Y converges to t, its largest jump to zero;
* Y_t is asymptotically Normal(0, int_0^t y(t,u)^2 du);
* the terminal price is asymptotically lognormal with
  log S_T ~ Normal(log s0 + int_0^T b - sigma^2 T / 2, sigma^2 Var(Y_T)).

Monte Carlo statistics draw one innovation stream per path, so every
report is reproducible bit for bit for any worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import ndtr

from .errors import DomainError, NumericalRegimeError
from .kernels import KernelModel
from .lattice import build_coefficient_table, lattice_steps
from .parallel import map_chunks
from .paths import DiscretePath, quadratic_variation, split_by_jump_threshold
from .quadrature import adaptive_simpson
from .rng import LAWS, RADEMACHER, InnovationColumns

MC_BLOCK = 8192


@dataclass(frozen=True)
class ConvergenceReport:
    """Per-n discrepancies of one statistic against its limit."""

    statistic: str
    n_values: tuple[int, ...]
    values: tuple[float, ...]
    stderr: tuple[float, ...] | None = None
    slope: float | None = None

    def to_dict(self) -> dict:
        out = {
            "statistic": self.statistic,
            "n": list(self.n_values),
            "values": list(self.values),
        }
        if self.stderr is not None:
            out["stderr"] = list(self.stderr)
        if self.slope is not None:
            out["slope"] = self.slope
        return out


def loglog_slope(ns: Sequence[int], values: Sequence[float]) -> float | None:
    """Least-squares slope of log(value) against log(n) over positive values."""
    pts = [(n, v) for n, v in zip(ns, values) if v > 0.0]
    if len(pts) < 2:
        return None
    x = np.log([n for n, _ in pts])
    y = np.log([v for _, v in pts])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


# ---------------------------------------------------------------------------
# deterministic covariance checks
# ---------------------------------------------------------------------------


def limit_variance(kernel: KernelModel, t: float, tol: float = 1e-12) -> float:
    """int_0^t y(t, u)^2 du by adaptive quadrature."""
    if t == 0.0:
        return 0.0
    return adaptive_simpson(lambda u: kernel.y(t, u) ** 2, 0.0, t, tol)


def limit_covariance(kernel: KernelModel, t1: float, t2: float, tol: float = 1e-12) -> float:
    lo = min(t1, t2)
    if lo == 0.0:
        return 0.0
    return adaptive_simpson(lambda u: kernel.y(t1, u) * kernel.y(t2, u), 0.0, lo, tol)


def discrete_covariance(kernel: KernelModel, t1: float, t2: float, n: int) -> float:
    """(1/n) sum_{i<=floor(n min(t1,t2))} y(floor(nt1)/n, i/n) y(floor(nt2)/n, i/n)."""
    k1 = lattice_steps(n, t1)
    k2 = lattice_steps(n, t2)
    kmin = min(k1, k2)
    if kmin == 0:
        return 0.0
    u = np.arange(1, kmin + 1, dtype=np.float64) / n
    return float(kernel.y_row(k1 / n, u) @ kernel.y_row(k2 / n, u)) / n


def discrete_covariance_matrix(kernel: KernelModel, t_list: Sequence[float], n: int) -> np.ndarray:
    d = len(t_list)
    out = np.empty((d, d))
    for a in range(d):
        for b in range(a, d):
            out[a, b] = out[b, a] = discrete_covariance(kernel, t_list[a], t_list[b], n)
    return out


def variance_discrepancy(
    kernel: KernelModel, t_list: Sequence[float], n_list: Sequence[int]
) -> ConvergenceReport:
    """Worst |discrete - limit| covariance over the requested time pairs,
    per lattice resolution.  Deterministic: repeated calls are identical."""
    ts = [float(t) for t in t_list]
    if not ts or not n_list:
        raise DomainError("t_list and n_list must be nonempty")
    pairs = [(a, b) for a in range(len(ts)) for b in range(a, len(ts))]
    limits = {(a, b): limit_covariance(kernel, ts[a], ts[b]) for a, b in pairs}
    values = []
    for n in n_list:
        worst = 0.0
        for a, b in pairs:
            disc = discrete_covariance(kernel, ts[a], ts[b], int(n))
            worst = max(worst, abs(disc - limits[(a, b)]))
        values.append(worst)
    return ConvergenceReport(
        statistic="variance",
        n_values=tuple(int(n) for n in n_list),
        values=tuple(values),
        slope=loglog_slope(n_list, values),
    )


# ---------------------------------------------------------------------------
# Monte Carlo path statistics
# ---------------------------------------------------------------------------


def _recursion(kernel: KernelModel, n: int, m: int):
    if hasattr(kernel, "recursion_coefficients"):
        return kernel.recursion_coefficients(n, m)
    return None


def _accumulate_paths(
    kernel: KernelModel,
    n: int,
    m: int,
    paths: int,
    seed: int,
    law: str,
    horizon: float,
    price: tuple[float, Callable[[float], float], float] | None,
    workers: int = 1,
    stream_start: int = 0,
):
    """Per-path terminal statistics for `paths` simulated paths.

    Returns arrays (y_end, qv_gap, jump_sup, s_end) in path order; s_end is
    None unless price (sigma, b, s0) is given.  qv_gap is the sup over
    t in [0, horizon] of |[Y]_t - t| for the piecewise-constant [Y].
    """
    if law not in LAWS:
        raise DomainError(f"unknown innovation law {law!r}")
    rec = _recursion(kernel, n, m)
    table = None if rec is not None else build_coefficient_table(kernel, n, m / n)
    inv_sqrt = 1.0 / math.sqrt(n)

    def run(start: int, count: int):
        cols = InnovationColumns(law, seed, stream_start + start, count)
        y = np.zeros(count)
        qv = np.zeros(count)
        gap = np.full(count, min(1.0 / n, horizon))
        jmax = np.zeros(count)
        s = None
        if price is not None:
            s = np.full(count, price[2])
        if rec is not None:
            g_lat, decay, c_scaled = rec
            c_r = c_scaled / n
            r = np.zeros(count)
            xi_all = None
        else:
            xi_all = np.empty((count, m))
        for k in range(1, m + 1):
            x = cols.next()
            if rec is not None:
                dy = inv_sqrt * (x + c_r * r)
                r = decay * r + g_lat[k - 1] * x
            else:
                xi_all[:, k - 1] = x
                w_prev = table.y_row(k - 1) if k > 1 else None
                yk = inv_sqrt * (xi_all[:, :k] @ table.y_row(k))
                yprev = inv_sqrt * (xi_all[:, : k - 1] @ w_prev) if k > 1 else 0.0
                dy = yk - yprev
            y += dy
            qv += dy * dy
            np.maximum(jmax, np.abs(dy), out=jmax)
            tk = k / n
            np.maximum(gap, np.abs(qv - tk), out=gap)
            t_next = (k + 1) / n if k < m else horizon
            if t_next > tk:
                np.maximum(gap, np.abs(qv - t_next), out=gap)
            if s is not None:
                sigma, bfun, _ = price
                factor = 1.0 + sigma * dy + bfun(tk) / n
                if np.any(factor <= 0.0):
                    raise NumericalRegimeError(
                        f"price factor <= 0 at step {k}", step=k
                    )
                s *= factor
        return y, qv, gap, jmax, s

    parts = map_chunks(run, paths, MC_BLOCK, workers)
    y = np.concatenate([p[0] for p in parts])
    qv = np.concatenate([p[1] for p in parts])
    gap = np.concatenate([p[2] for p in parts])
    jmax = np.concatenate([p[3] for p in parts])
    s = np.concatenate([p[4] for p in parts]) if price is not None else None
    return y, qv, gap, jmax, s


def qv_discrepancy(
    kernel: KernelModel,
    n_list: Sequence[int],
    paths: int,
    seed: int,
    T: float | None = None,
    law: str = RADEMACHER,
    workers: int = 1,
) -> ConvergenceReport:
    """Monte Carlo estimate of E[sup_{t<=T} |[Y]_t - t|] per resolution."""
    horizon = kernel.horizon if T is None else float(T)
    values, errs = [], []
    for n in n_list:
        m = lattice_steps(int(n), horizon)
        _, _, gap, _, _ = _accumulate_paths(
            kernel, int(n), m, paths, seed, law, horizon, None, workers
        )
        values.append(float(gap.mean()))
        errs.append(float(gap.std(ddof=1) / math.sqrt(paths)) if paths > 1 else 0.0)
    return ConvergenceReport(
        statistic="qv",
        n_values=tuple(int(n) for n in n_list),
        values=tuple(values),
        stderr=tuple(errs),
        slope=loglog_slope(n_list, values),
    )


def jump_moment(
    kernel: KernelModel,
    n_list: Sequence[int],
    paths: int,
    seed: int,
    T: float | None = None,
    law: str = RADEMACHER,
    workers: int = 1,
) -> ConvergenceReport:
    """n * E[sup_t |dY_t|^4] per resolution; bounded iff the largest jump
    vanishes at the expected fourth-moment rate."""
    horizon = kernel.horizon if T is None else float(T)
    values, errs = [], []
    for n in n_list:
        m = lattice_steps(int(n), horizon)
        _, _, _, jmax, _ = _accumulate_paths(
            kernel, int(n), m, paths, seed, law, horizon, None, workers
        )
        fourth = jmax**4
        values.append(float(n * fourth.mean()))
        errs.append(
            float(n * fourth.std(ddof=1) / math.sqrt(paths)) if paths > 1 else 0.0
        )
    return ConvergenceReport(
        statistic="jump",
        n_values=tuple(int(n) for n in n_list),
        values=tuple(values),
        stderr=tuple(errs),
        slope=loglog_slope(n_list, values),
    )


# ---------------------------------------------------------------------------
# distributional distances
# ---------------------------------------------------------------------------


def ks_statistic(samples: np.ndarray, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """One-sample Kolmogorov-Smirnov distance against an exact CDF."""
    xs = np.sort(np.asarray(samples, dtype=np.float64))
    size = xs.shape[0]
    if size == 0:
        raise DomainError("need at least one sample")
    f = np.asarray(cdf(xs), dtype=np.float64)
    i = np.arange(1, size + 1)
    return float(max((i / size - f).max(), (f - (i - 1) / size).max()))


def fdd_distance(
    kernel: KernelModel, t: float, n: int, samples: int, seed: int, workers: int = 1
) -> float:
    """KS distance of Y_t on the n-lattice to its Normal(0, Var) limit."""
    m = lattice_steps(n, t)
    if m < 1:
        raise DomainError(f"t={t} has no lattice steps at n={n}")
    y, _, _, _, _ = _accumulate_paths(
        kernel, n, m, samples, seed, RADEMACHER, t, None, workers
    )
    sd = math.sqrt(limit_variance(kernel, t))
    if sd == 0.0:
        return float(np.mean(y != 0.0))
    return ks_statistic(y, lambda x: ndtr(x / sd))


def terminal_log_law(
    kernel: KernelModel,
    T: float,
    sigma: float,
    drift: Callable[[float], float] | float,
    s0: float,
):
    """(mean, variance) of log S_T under the limiting lognormal law."""
    if callable(drift):
        drift_integral = adaptive_simpson(drift, 0.0, T, 1e-12)
    else:
        drift_integral = float(drift) * T
    mean = math.log(s0) + drift_integral - 0.5 * sigma * sigma * T
    var = sigma * sigma * limit_variance(kernel, T)
    return mean, var


def terminal_price_distance(
    kernel: KernelModel,
    n: int,
    samples: int,
    seed: int,
    *,
    T: float,
    sigma: float,
    drift: Callable[[float], float] | float = 0.0,
    s0: float = 1.0,
    workers: int = 1,
) -> float:
    """KS distance of the simulated terminal price to the lognormal limit.

    sigma = 0 is the degenerate sanity case: the distance is then the
    sampled mass away from the deterministic limit point.
    """
    m = lattice_steps(n, T)
    bfun = drift if callable(drift) else (lambda _t, _b=float(drift): _b)
    _, _, _, _, s_end = _accumulate_paths(
        kernel, n, m, samples, seed, RADEMACHER, T, (sigma, bfun, s0), workers
    )
    mean, var = terminal_log_law(kernel, T, sigma, drift, s0)
    if var == 0.0:
        point = math.exp(mean)
        return float(np.mean(s_end != point))
    sd = math.sqrt(var)
    return ks_statistic(s_end, lambda x: ndtr((np.log(x) - mean) / sd))


def decomposition_diagnostics(path: DiscretePath, sigma: float):
    """(sup_t |Y2_t|, [Y2]_T) for the large-move remainder of the path;
    both are exactly zero once every |dY| stays below 1/(2 sigma)."""
    _, y2 = split_by_jump_threshold(path, sigma)
    qv2 = quadratic_variation(y2)
    return float(np.abs(y2).max()), float(qv2[-1])


def fourth_moment_max_ratio(
    kernel: KernelModel,
    n: int,
    paths: int,
    seed: int,
    T: float | None = None,
    grid: int = 8,
    law: str = RADEMACHER,
) -> float:
    """max over lattice pairs (s, t), t - s >= 1/n, of
    E[|Y_t - Y_s|^4] / (t - s)^2, estimated over `paths` paths.

    Bounded ratios across n are the testable surrogate for the
    fourth-moment increment inequality behind tightness.
    """
    horizon = kernel.horizon if T is None else float(T)
    m = lattice_steps(n, horizon)
    marks = sorted({lattice_steps(n, horizon * j / grid) for j in range(grid + 1)})
    rec = _recursion(kernel, n, m)
    if rec is None:
        raise DomainError("fourth_moment_max_ratio needs a recursion-form kernel")
    g_lat, decay, c_scaled = rec
    c_r = c_scaled / n
    inv_sqrt = 1.0 / math.sqrt(n)

    def run(start: int, count: int):
        cols = InnovationColumns(law, seed, start, count)
        y = np.zeros(count)
        r = np.zeros(count)
        snaps = {0: np.zeros(count)} if 0 in marks else {}
        for k in range(1, m + 1):
            x = cols.next()
            y = y + inv_sqrt * (x + c_r * r)
            r = decay * r + g_lat[k - 1] * x
            if k in marks:
                snaps[k] = y.copy()
        return snaps

    parts = map_chunks(run, paths, MC_BLOCK, 1)
    snaps = {k: np.concatenate([p[k] for p in parts]) for k in marks}
    worst = 0.0
    for ia, ka in enumerate(marks):
        for kb in marks[ia + 1 :]:
            if kb - ka < 1:
                continue
            dt = (kb - ka) / n
            moment = float(np.mean((snaps[kb] - snaps[ka]) ** 4))
            worst = max(worst, moment / (dt * dt))
    return worst
