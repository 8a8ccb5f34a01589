"""Seeded hash functions for cell indices and the checksum.

All hashing goes through the SplitMix64 finalizer applied to ``key ^ seed``.
The scalar, numpy and numba versions below must agree bit for bit; sketches
built through any of them are interchangeable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import KeyRangeError

M64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_C1 = 0xBF58476D1CE4E5B9
_C2 = 0x94D049BB133111EB


def mix64(seed: int, x: int) -> int:
    z = ((x ^ seed) + _GOLDEN) & M64
    z = ((z ^ (z >> 30)) * _C1) & M64
    z = ((z ^ (z >> 27)) * _C2) & M64
    return z ^ (z >> 31)


def mix64_vec(seed: int, x: np.ndarray) -> np.ndarray:
    z = (np.asarray(x, dtype=np.uint64) ^ np.uint64(seed)) + np.uint64(_GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_C1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_C2)
    return z ^ (z >> np.uint64(31))


@njit(cache=True, inline="always")
def mix64_nb(seed, x):
    z = (x ^ seed) + np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


# Default seeds: SplitMix64 outputs for 1..4.  Fixed so that independently
# created sketches are compatible.
DEFAULT_SEEDS = (
    0x910A2DEC89025CC1,
    0xBEEB8DA1658EEC67,
    0xF893A2EEFB32555E,
    0x71C18690EE42C90B,
)


@dataclass(frozen=True)
class HashSeeds:
    """Three index seeds and one checksum seed, all 64-bit."""

    index_seeds: tuple = DEFAULT_SEEDS[:3]
    checksum_seed: int = DEFAULT_SEEDS[3]

    def __post_init__(self):
        seeds = tuple(int(s) for s in self.index_seeds)
        if len(seeds) != 3:
            raise ValueError("need exactly three index seeds")
        if len(set(seeds)) != 3:
            raise ValueError("index seeds must be pairwise distinct")
        if any(not 0 <= s <= M64 for s in seeds + (self.checksum_seed,)):
            raise ValueError("seeds must be 64-bit")
        object.__setattr__(self, "index_seeds", seeds)

    @classmethod
    def from_int(cls, seed: int) -> "HashSeeds":
        """Derive all four seeds from one integer."""
        s = [mix64(seed & M64, i) for i in range(4)]
        # Collisions among three 64-bit mixes are not a practical concern,
        # but keep the invariant unconditional.
        while len(set(s[:3])) < 3:
            s[2] = mix64(s[2], 0x5EED)
        return cls(tuple(s[:3]), s[3])

    def as_tuple(self) -> tuple:
        return self.index_seeds + (self.checksum_seed,)

    def index_array(self) -> np.ndarray:
        return np.array(self.index_seeds, dtype=np.uint64)


def index_set(x: int, n: int, seeds: HashSeeds) -> list:
    """Distinct cell indices of ``x`` in a table of ``n`` cells.

    Returned in hash order with repeats dropped, so toggling touches each cell
    once even when two hash functions collide.
    """
    s1, s2, s3 = seeds.index_seeds
    a = mix64(s1, x) % n
    b = mix64(s2, x) % n
    c = mix64(s3, x) % n
    if b == a:
        return [a] if c == a else [a, c]
    if c == a or c == b:
        return [a, b]
    return [a, b, c]


def index_arrays(keys: np.ndarray, n: int, seeds: HashSeeds):
    """Vectorised indices: three int64 arrays plus validity masks for the 2nd and 3rd."""
    keys = np.asarray(keys, dtype=np.uint64)
    nn = np.uint64(n)
    a, b, c = (mix64_vec(s, keys) % nn for s in seeds.index_seeds)
    keep_b = b != a
    keep_c = (c != a) & (c != b)
    return a.astype(np.int64), b.astype(np.int64), c.astype(np.int64), keep_b, keep_c


def checksum_hash(x: int, r: int, seed: int) -> int:
    """Low ``r`` bits of the checksum mix of ``x``."""
    if not 1 <= r <= 64:
        raise KeyRangeError(f"checksum width {r} outside [1, 64]")
    return mix64(seed, x) & ((1 << r) - 1)


def checksum_hash_vec(keys: np.ndarray, r: int, seed: int) -> np.ndarray:
    if not 1 <= r <= 64:
        raise KeyRangeError(f"checksum width {r} outside [1, 64]")
    return mix64_vec(seed, keys) & np.uint64((1 << r) - 1)
