"""Deterministic innovation streams.

Generator: xoshiro256** (Blackman/Vigna), one independent stream per
(seed, stream_index) pair.  Stream states are filled with splitmix64
outputs: word j of stream k is fin(seed + GAMMA * (4k + j + 1)) where fin
is the splitmix64 finalizer and GAMMA its additive constant.  Because the
splitmix64 state sequence is arithmetic, this is exactly "lay all stream
states end to end along one splitmix64 sequence", and it is computable for
any stream directly, which keeps Monte Carlo draws independent of how
trials are partitioned across workers.

Draw discipline: every variate consumes exactly one 64-bit output.

* rademacher: the top bit, mapped to {-1, +1};
* uniform:    ((raw >> 11) + 0.5) * 2**-53, strictly inside (0, 1);
* standard-normal: inverse normal CDF of that uniform, so streams stay
  aligned across innovation laws.

Two equivalent engines are provided and tested against each other: a
python-int scalar engine for one long stream, and a numpy engine advancing
many streams in lockstep (one vector step per draw position).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_U53 = 2.0**-53

RADEMACHER = "rademacher"
STANDARD_NORMAL = "standard-normal"
LAWS = (RADEMACHER, STANDARD_NORMAL)


def _mix64(x: int) -> int:
    """splitmix64 output finalizer."""
    x &= MASK64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & MASK64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & MASK64
    x ^= x >> 31
    return x


def stream_state(seed: int, stream_index: int) -> tuple[int, int, int, int]:
    """Four xoshiro256** state words for one stream."""
    base = seed & MASK64
    words = tuple(
        _mix64(base + GAMMA * (4 * stream_index + j + 1)) for j in range(4)
    )
    if words == (0, 0, 0, 0):  # forbidden fixed point; unreachable in practice
        words = (GAMMA, 0, 0, 0)
    return words


class ScalarXoshiro:
    """Sequential xoshiro256** over python ints (one stream)."""

    def __init__(self, seed: int, stream_index: int = 0):
        self.s = list(stream_state(seed, stream_index))

    def next_raw(self) -> int:
        s = self.s
        x = (s[1] * 5) & MASK64
        result = (((x << 7) | (x >> 57)) & MASK64) * 9 & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = ((s[3] << 45) | (s[3] >> 19)) & MASK64
        return result

    def rademacher(self, m: int) -> np.ndarray:
        return np.array([2.0 * (self.next_raw() >> 63) - 1.0 for _ in range(m)])

    def uniform(self, m: int) -> np.ndarray:
        return np.array([((self.next_raw() >> 11) + 0.5) * _U53 for _ in range(m)])


def _rotl(x: np.ndarray, k: int) -> np.ndarray:
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


class XoshiroStreams:
    """A block of xoshiro256** streams advanced in lockstep.

    Stream j of the block is stream_start + j; its draw sequence is
    identical to ScalarXoshiro(seed, stream_start + j).
    """

    def __init__(self, seed: int, stream_start: int, count: int):
        idx = np.arange(stream_start, stream_start + count, dtype=np.uint64)
        state = np.empty((4, count), dtype=np.uint64)
        base = np.uint64(seed & MASK64)
        for j in range(4):
            x = base + np.uint64(GAMMA) * (np.uint64(4) * idx + np.uint64(j + 1))
            x ^= x >> np.uint64(30)
            x *= np.uint64(0xBF58476D1CE4E5B9)
            x ^= x >> np.uint64(27)
            x *= np.uint64(0x94D049BB133111EB)
            x ^= x >> np.uint64(31)
            state[j] = x
        dead = (state == 0).all(axis=0)
        if dead.any():
            state[0, dead] = np.uint64(GAMMA)
        self.state = state

    def next_raw(self) -> np.ndarray:
        s0, s1, s2, s3 = self.state
        result = _rotl(s1 * np.uint64(5), 7) * np.uint64(9)
        t = s1 << np.uint64(17)
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        self.state[3] = _rotl(s3, 45)
        self.state[0] = s0
        self.state[1] = s1
        self.state[2] = s2
        return result

    def rademacher(self) -> np.ndarray:
        return 2.0 * (self.next_raw() >> np.uint64(63)).astype(np.float64) - 1.0

    def uniform(self) -> np.ndarray:
        return ((self.next_raw() >> np.uint64(11)).astype(np.float64) + 0.5) * _U53

    def normal(self) -> np.ndarray:
        return ndtri(self.uniform())


@dataclass(frozen=True)
class InnovationSpec:
    """Innovation law plus its deterministic stream identity.

    Both laws have mean 0, unit variance and finite fourth moment; the
    rademacher law takes the values +-1 with probability 1/2 each.
    """

    law: str = RADEMACHER
    seed: int = 0
    stream_index: int = 0

    def __post_init__(self):
        if self.law not in LAWS:
            raise ValueError(f"unknown innovation law {self.law!r}")


def sample_innovations(spec: InnovationSpec, m: int) -> np.ndarray:
    """First m innovations of the stream named by spec (deterministic)."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    gen = ScalarXoshiro(spec.seed, spec.stream_index)
    if spec.law == RADEMACHER:
        return gen.rademacher(m)
    return ndtri(gen.uniform(m))


class InnovationColumns:
    """Innovations for a block of paths, one lattice step at a time.

    Path j of the block owns stream stream_start + j; column k of this
    iterator equals element k of sample_innovations for that stream, so
    per-path results never depend on how paths are grouped into blocks.
    """

    def __init__(self, law: str, seed: int, stream_start: int, count: int):
        if law not in LAWS:
            raise ValueError(f"unknown innovation law {law!r}")
        self.law = law
        self.streams = XoshiroStreams(seed, stream_start, count)

    def next(self) -> np.ndarray:
        if self.law == RADEMACHER:
            return self.streams.rademacher()
        return self.streams.normal()


def innovation_matrix(
    law: str, seed: int, stream_start: int, count: int, m: int
) -> np.ndarray:
    """(count, m) innovation block; row j is stream stream_start + j."""
    cols = InnovationColumns(law, seed, stream_start, count)
    out = np.empty((count, m), dtype=np.float64)
    for k in range(m):
        out[:, k] = cols.next()
    return out
