"""Shared fixtures: the small-market test battery and brute-force oracles.

The oracles enumerate every innovation prefix directly from the
unscaled weight increments, independently of the reduced inequality the
library uses, so they can referee it.
"""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from memomarket import ConstantKernel, MemoryKernel, MarketParams, build_coefficient_table
from memomarket.lattice import CoefficientTable


def battery_configs():
    """>= 50 deterministic market configurations with m <= 12, spanning
    p = 0, constant kernels, memory kernels (both signs of p) and r <> b."""
    kernels = [
        ("p0", MemoryKernel.from_rates(0.0, 1.0, 1.0)),
        ("mem+", MemoryKernel.from_rates(1.0, 1.0, 1.0)),
        ("mem-", MemoryKernel.from_rates(-0.9, 1.0, 1.0)),
        ("memfast", MemoryKernel.from_rates(3.0, 0.25, 1.0)),
        ("const05", ConstantKernel(0.5, 1.0)),
        ("const2", ConstantKernel(2.0, 1.0)),
        ("const3", ConstantKernel(3.0, 1.0)),
    ]
    markets = [
        (3, 0.0, 0.0, 0.1),
        (5, 0.0, 0.0, 0.5),
        (8, 0.02, 0.0, 0.1),
        (8, 0.0, 0.05, 0.25),
        (10, -0.03, 0.01, 0.2),
        (12, 0.0, 0.0, 0.1),
        (12, 0.4, 0.0, 0.05),
        (6, 0.0, 0.0, 0.25),
    ]
    out = []
    for kname, kernel in kernels:
        for N, r, b, sigma in markets:
            params = MarketParams(N=N, T=1.0, r=r, b=b, sigma=sigma, s0=1.0)
            out.append(pytest.param(kernel, params, id=f"{kname}-N{N}-r{r}-b{b}-s{sigma}"))
    return out


def brute_force_free(table: CoefficientTable, params: MarketParams) -> bool:
    """Directly test d_n < rho < u_n for every step and every prefix, in
    natural (unscaled) units."""
    rho = params.rho
    hs = params.half_spread
    for n in range(1, table.m + 1):
        delta = table.delta_row(n)
        for signs in itertools.product((-1.0, 1.0), repeat=n - 1):
            mu = hs * float(delta @ np.array(signs)) if n > 1 else 0.0
            if not (mu - hs < rho < mu + hs):
                return False
    return True


def brute_force_pn(table: CoefficientTable, params: MarketParams):
    """Full enumeration of all 2**(m-1) sign vectors: per-vector first
    violation using the same scaled predicate as the library, without any
    pruning.  Returns (p, histogram dict)."""
    m = table.m
    shift = params.shift_scaled
    thr = float(params.N)
    k = m - 1
    total = 1 << k
    signs = np.empty((total, k))
    for bit in range(k):
        signs[:, bit] = np.where((np.arange(total) >> bit) & 1, 1.0, -1.0)
    first = np.zeros(total, dtype=np.int64)
    for n in range(1, m + 1):
        drift = signs[:, : n - 1] @ table.w_row(n) if n > 1 else np.zeros(total)
        hit = (np.abs(drift - shift) >= thr) & (first == 0)
        first[hit] = n
    mass = 1.0 / total
    hist = {}
    p = 0.0
    for n in range(1, m + 1):
        c = int((first == n).sum())
        if c:
            hist[n] = c * mass
            p += c * mass
    return p, hist


@pytest.fixture
def const2_market8():
    kernel = ConstantKernel(2.0, 1.0)
    params = MarketParams(N=8, T=1.0, r=0.0, b=0.0, sigma=0.1, s0=1.0)
    return kernel, build_coefficient_table(kernel, 8, 1.0), params
