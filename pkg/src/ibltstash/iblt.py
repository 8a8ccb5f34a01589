"""Keysum-only IBLT with three hash functions and a time-limited peeling decoder."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
import math

import numpy as np
from numba import njit

from .errors import IncompatibleSketch, KeyRangeError, KeyZero
from .hashing import HashSeeds, index_arrays, index_set, mix64_nb

# Peelability threshold of random 3-uniform hypergraphs.
C3 = Fraction(122179, 100000)
DEFAULT_EPSILON = Fraction(1, 10)


def table_size(capacity: int, epsilon=DEFAULT_EPSILON) -> int:
    """Cell count ceil((c3 + epsilon) * capacity), computed exactly."""
    if capacity < 1:
        raise KeyRangeError("capacity must be at least 1")
    eps = Fraction(epsilon).limit_denominator(1000)
    return math.ceil((C3 + eps) * capacity)


def check_key(x: int, w: int) -> int:
    x = int(x)
    if x == 0:
        raise KeyZero("key 0 is reserved")
    if not 0 < x < (1 << w):
        raise KeyRangeError(f"key {x} outside [1, 2^{w} - 1]")
    return x


def check_keys(keys, w: int) -> np.ndarray:
    arr = np.asarray(keys)
    if arr.size and arr.dtype.kind not in "ui":
        raise KeyRangeError("keys must be integers")
    if arr.size and arr.dtype.kind == "i" and (arr < 0).any():
        raise KeyRangeError("negative key")
    arr = arr.astype(np.uint64).ravel()
    if (arr == 0).any():
        raise KeyZero("key 0 is reserved")
    if w < 64 and (arr >> np.uint64(w)).any():
        raise KeyRangeError(f"key outside [1, 2^{w} - 1]")
    return arr


def symmetric_fold(toggled) -> set:
    """S_dec from a sequence of toggled keys: each toggle flips membership."""
    out = set()
    for x in toggled:
        if x in out:
            out.remove(x)
        else:
            out.add(x)
    return out


def odd_keys(toggled: np.ndarray) -> np.ndarray:
    """Vectorised :func:`symmetric_fold`: keys toggled an odd number of times, sorted."""
    keys, counts = np.unique(toggled, return_counts=True)
    return keys[counts & 1 == 1]


@dataclass
class DecodeOutcome:
    """Decoder result.  ``recovered_keys`` is a sorted array or a set of keys."""

    recovered_keys: object
    steps: int
    timed_out: bool
    residual_nonzero: bool
    toggled: object = field(default_factory=list, repr=False)

    @cached_property
    def recovered(self) -> set:
        keys = self.recovered_keys
        return set(keys.tolist()) if isinstance(keys, np.ndarray) else set(keys)

    @property
    def clean(self) -> bool:
        return not self.timed_out and not self.residual_nonzero


@njit(cache=True, inline="always")
def _hashes(x, n, s1, s2, s3):
    nn = np.uint64(n)
    a = np.int64(mix64_nb(s1, x) % nn)
    b = np.int64(mix64_nb(s2, x) % nn)
    c = np.int64(mix64_nb(s3, x) % nn)
    return a, b, c


@njit(cache=True)
def _looks_pure(cells, i, s1, s2, s3):
    x = cells[i]
    if x == 0:
        return False
    a, b, c = _hashes(x, cells.shape[0], s1, s2, s3)
    return a == i or b == i or c == i


@njit(cache=True)
def _peel(cells, s1, s2, s3, tmax, out):
    """Round-based peeling on ``cells`` in place.

    Q and Q_next hold each index at most once (a stamp array marks membership
    per round) and every round walks Q in ascending index order.  Every cell
    pure at the end of a round was touched during it, so Q_next filtered by
    purity equals a full rescan of the table.  Detected keys
    are written to ``out`` in toggle order.  Returns (steps, timed_out).
    """
    n = cells.shape[0]
    stamp = np.full(n, -1, np.int32)
    q = np.empty(n, np.int32)
    qn = np.empty(n, np.int32)
    qlen = 0
    for i in range(n):
        if _looks_pure(cells, i, s1, s2, s3):
            q[qlen] = i
            qlen += 1
    t = 0
    rnd = 0
    while qlen > 0:
        qnlen = 0
        for k in range(qlen):
            i = q[k]
            if not _looks_pure(cells, i, s1, s2, s3):
                continue
            x = cells[i]
            a, b, c = _hashes(x, n, s1, s2, s3)
            cells[a] ^= x
            if b != a:
                cells[b] ^= x
            if c != a and c != b:
                cells[c] ^= x
            out[t] = x
            for j in (a, b, c):
                if stamp[j] != rnd and _looks_pure(cells, j, s1, s2, s3):
                    stamp[j] = rnd
                    qn[qnlen] = j
                    qnlen += 1
            t += 1
            if t >= tmax:
                return t, True
        q, qn = qn, q
        q[:qnlen].sort()
        # Keep only cells still pure at the round boundary, so each round
        # starts from exactly the set a full rescan would find.
        qlen = 0
        for k in range(qnlen):
            if _looks_pure(cells, q[k], s1, s2, s3):
                q[qlen] = q[k]
                qlen += 1
        rnd += 1
    return t, False


class Iblt:
    """Array of ``n`` XOR keysums over ``w``-bit keys.

    Key 0 is rejected everywhere: an all-zero cell means empty.
    """

    def __init__(self, n: int, w: int = 32, seeds: HashSeeds | None = None):
        if n < 1:
            raise KeyRangeError("an IBLT needs at least one cell")
        if not 1 <= w <= 64:
            raise KeyRangeError(f"unsupported key width {w}")
        self.n = int(n)
        self.w = int(w)
        self.seeds = seeds if seeds is not None else HashSeeds()
        self.cells = np.zeros(self.n, dtype=np.uint64)

    @classmethod
    def from_keys(cls, keys, n, w=32, seeds=None) -> "Iblt":
        t = cls(n, w, seeds)
        t.toggle_many(keys)
        return t

    def copy(self) -> "Iblt":
        other = Iblt(self.n, self.w, self.seeds)
        other.cells = self.cells.copy()
        return other

    def __repr__(self):
        return f"Iblt(n={self.n}, w={self.w}, nonzero={self.nonzero_cells()})"

    def __eq__(self, other):
        if not isinstance(other, Iblt):
            return NotImplemented
        return (
            self.n == other.n
            and self.w == other.w
            and self.seeds == other.seeds
            and np.array_equal(self.cells, other.cells)
        )

    def indices(self, x: int) -> list:
        return index_set(x, self.n, self.seeds)

    def toggle(self, x: int) -> None:
        x = check_key(x, self.w)
        v = np.uint64(x)
        for i in index_set(x, self.n, self.seeds):
            self.cells[i] ^= v

    def toggle_many(self, keys) -> None:
        keys = check_keys(keys, self.w)
        if not keys.size:
            return
        a, b, c, keep_b, keep_c = index_arrays(keys, self.n, self.seeds)
        np.bitwise_xor.at(self.cells, a, keys)
        np.bitwise_xor.at(self.cells, b[keep_b], keys[keep_b])
        np.bitwise_xor.at(self.cells, c[keep_c], keys[keep_c])

    def _check_compatible(self, other: "Iblt") -> None:
        if (self.n, self.w, self.seeds) != (other.n, other.w, other.seeds):
            raise IncompatibleSketch("IBLTs differ in size, width or seeds")

    def merge(self, other: "Iblt") -> "Iblt":
        """Cell-wise XOR; stores the symmetric difference of the two key sets."""
        self._check_compatible(other)
        out = Iblt(self.n, self.w, self.seeds)
        out.cells = self.cells ^ other.cells
        return out

    __xor__ = merge

    def looks_pure(self, i: int) -> bool:
        x = int(self.cells[i])
        return x != 0 and i in index_set(x, self.n, self.seeds)

    def is_empty(self) -> bool:
        return not self.cells.any()

    def nonzero_cells(self) -> int:
        return int(np.count_nonzero(self.cells))

    def peel(self):
        """Run the peeling decoder in place; returns (toggled keys, steps, timed_out)."""
        s1, s2, s3 = (np.uint64(s) for s in self.seeds.index_seeds)
        out = np.zeros(2 * self.n, dtype=np.uint64)
        steps, timed_out = _peel(self.cells, s1, s2, s3, 2 * self.n, out)
        return out[:steps], int(steps), bool(timed_out)

    def decode(self) -> DecodeOutcome:
        """Peel keys out of the table, mutating it.

        At most 2n toggles are performed.  Afterwards the table stores exactly
        the symmetric difference of its original contents and ``recovered``.
        """
        toggled, steps, timed_out = self.peel()
        return DecodeOutcome(
            recovered_keys=odd_keys(toggled),
            steps=steps,
            timed_out=timed_out,
            residual_nonzero=not self.is_empty(),
            toggled=toggled,
        )
