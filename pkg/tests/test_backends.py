"""The compiled extension and the numpy fallback must be interchangeable."""

import importlib.util

import numpy as np
import pytest

from memomarket import ConstantKernel, MarketParams, MemoryKernel, build_coefficient_table
from memomarket import _backend, _pure
from memomarket.rng import innovation_matrix

HAVE_CORE = importlib.util.find_spec("memomarket._core") is not None
core = pytest.importorskip("memomarket._core") if HAVE_CORE else None

pytestmark = pytest.mark.skipif(not HAVE_CORE, reason="compiled core not built")


def _setup(kernel, N, T, sigma=0.1, r=0.0, b=0.0):
    params = MarketParams(N=N, T=T, r=r, b=b, sigma=sigma, s0=1.0)
    table = build_coefficient_table(kernel, N, T)
    return params, table


def test_backend_selected_compiled():
    assert _backend.backend_name() in ("compiled", "pure")


def test_fast_increments_parity():
    k = MemoryKernel.from_rates(1.0, 1.0, 1.0)
    m = 512
    g, decay, c_scaled = k.recursion_coefficients(512, m)
    xi = innovation_matrix("rademacher", 3, 0, 1, m)[0]
    dy_pure, ops_pure = _pure.y_fast_increments(g, decay, c_scaled, 1.0 / np.sqrt(512), 512.0, xi)
    dy_core, ops_core = core.y_fast_increments(g, decay, c_scaled, 1.0 / np.sqrt(512), 512.0, xi)
    assert ops_pure == ops_core == m
    assert np.array_equal(dy_pure, dy_core)


def test_recursive_scan_parity_constant_kernel_exact():
    k = ConstantKernel(2.0, 1.0)
    params, _ = _setup(k, 8, 1.0)
    g, decay, c_scaled = k.recursion_coefficients(8, 8)
    xi = innovation_matrix("rademacher", 1, 0, 4096, 7)
    a = _pure.first_violation_recursive(g, decay, c_scaled, params.shift_scaled, 8.0, xi)
    b = core.first_violation_recursive(g, decay, c_scaled, params.shift_scaled, 8.0, xi)
    assert np.array_equal(a, b)


def test_recursive_scan_parity_memory_kernel():
    k = MemoryKernel.from_rates(-0.9, 1.0, 1.0)
    params, _ = _setup(k, 12, 1.0, sigma=0.25)
    g, decay, c_scaled = k.recursion_coefficients(12, 12)
    xi = innovation_matrix("rademacher", 2, 0, 4096, 11)
    a = _pure.first_violation_recursive(g, decay, c_scaled, params.shift_scaled, 12.0, xi)
    b = core.first_violation_recursive(g, decay, c_scaled, params.shift_scaled, 12.0, xi)
    assert np.array_equal(a, b)


def test_table_scan_parity():
    k = MemoryKernel.from_rates(-0.9, 1.0, 1.0)
    params, table = _setup(k, 10, 1.0, sigma=0.25)
    xi = innovation_matrix("rademacher", 5, 0, 2048, 9)
    a = _pure.first_violation_table(
        table.w_flat, table.w_offsets, table.m, params.shift_scaled, 10.0, xi
    )
    b = core.first_violation_table(
        table.w_flat, table.w_offsets, table.m, params.shift_scaled, 10.0, xi
    )
    assert np.array_equal(a, b)


def test_dfs_parity_bitwise():
    for kernel, N, sigma in [
        (ConstantKernel(2.0, 1.0), 8, 0.1),
        (ConstantKernel(2.0, 1.0), 12, 0.3),
        (MemoryKernel.from_rates(-0.9, 1.0, 1.0), 12, 0.2),
    ]:
        params, table = _setup(kernel, N, 1.0, sigma=sigma)
        p_pure, h_pure = _pure.exact_pn_dfs(
            table.w_flat, table.w_offsets, table.m, params.shift_scaled, float(N)
        )
        p_core, h_core = core.exact_pn_dfs(
            table.w_flat, table.w_offsets, table.m, params.shift_scaled, float(N)
        )
        assert p_pure == p_core
        assert np.array_equal(h_pure, h_core)
