import math

import numpy as np
import pytest

from memomarket.rng import (
    InnovationColumns,
    InnovationSpec,
    ScalarXoshiro,
    XoshiroStreams,
    innovation_matrix,
    sample_innovations,
)


def test_determinism():
    spec = InnovationSpec("rademacher", 42, 0)
    a = sample_innovations(spec, 5)
    b = sample_innovations(spec, 5)
    assert np.array_equal(a, b)


def test_streams_differ():
    a = sample_innovations(InnovationSpec("rademacher", 42, 0), 64)
    b = sample_innovations(InnovationSpec("rademacher", 42, 1), 64)
    c = sample_innovations(InnovationSpec("rademacher", 43, 0), 64)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_values_are_signs():
    xi = sample_innovations(InnovationSpec("rademacher", 7, 3), 1000)
    assert set(np.unique(xi)) <= {-1.0, 1.0}


def test_scalar_and_vector_engines_agree():
    seed, start, count, m = 99, 5, 8, 64
    streams = XoshiroStreams(seed, start, count)
    vec = np.array([streams.next_raw() for _ in range(m)])
    for j in range(count):
        scalar = ScalarXoshiro(seed, start + j)
        col = np.array([scalar.next_raw() for _ in range(m)], dtype=np.uint64)
        assert np.array_equal(vec[:, j].astype(np.uint64), col)


def test_columns_match_single_stream_sampling():
    cols = InnovationColumns("rademacher", 11, 4, 6)
    block = np.array([cols.next() for _ in range(32)]).T  # (6 paths, 32 draws)
    for j in range(6):
        xi = sample_innovations(InnovationSpec("rademacher", 11, 4 + j), 32)
        assert np.array_equal(block[j], xi)


def test_innovation_matrix_layout():
    mat = innovation_matrix("rademacher", 3, 10, 5, 20)
    assert mat.shape == (5, 20)
    for j in range(5):
        assert np.array_equal(mat[j], sample_innovations(InnovationSpec("rademacher", 3, 10 + j), 20))


def test_rademacher_mean_clt_scale():
    m = 1_000_000
    xi = sample_innovations(InnovationSpec("rademacher", 2024, 0), m)
    assert abs(xi.mean()) <= 4.0 / math.sqrt(m)


def test_normal_moments():
    m = 1_000_000
    xi = sample_innovations(InnovationSpec("standard-normal", 2024, 0), m)
    assert abs(xi.var() - 1.0) <= 5.0 * math.sqrt(2.0 / m)
    assert abs(xi.mean()) <= 4.0 / math.sqrt(m)


def test_uniform_open_interval():
    gen = ScalarXoshiro(1, 0)
    u = gen.uniform(10_000)
    assert np.all(u > 0.0) and np.all(u < 1.0)


def test_unknown_law_rejected():
    with pytest.raises(ValueError):
        InnovationSpec("cauchy", 1, 0)
    with pytest.raises(ValueError):
        InnovationColumns("cauchy", 1, 0, 2)


def test_negative_m_rejected():
    with pytest.raises(ValueError):
        sample_innovations(InnovationSpec("rademacher", 1, 0), -1)
