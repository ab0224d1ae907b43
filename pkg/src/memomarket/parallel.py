"""Deterministic chunked execution.

Work is split into fixed-size chunks whose identity depends only on the
total and the chunk size, never on the worker count; results come back in
chunk order.  Reductions over that ordered list are therefore identical
for 1 worker and for many.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

R = TypeVar("R")


def map_chunks(
    fn: Callable[[int, int], R], total: int, chunk_size: int, workers: int = 1
) -> list[R]:
    """Apply fn(start, count) over [0, total) in chunks; ordered results."""
    if total < 0:
        raise ValueError("total must be nonnegative")
    if chunk_size < 1:
        raise ValueError("chunk_size must be positive")
    jobs = [(s, min(chunk_size, total - s)) for s in range(0, total, chunk_size)]
    if workers <= 1 or len(jobs) <= 1:
        return [fn(s, c) for s, c in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, s, c) for s, c in jobs]
        return [f.result() for f in futures]
