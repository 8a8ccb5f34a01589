"""Reconciliation sketch: IBLT, r-bit checksum and BCH stash behind one interface.

>>> a, b = Sketch(capacity=8, stash=8, w=16), Sketch(capacity=8, stash=8, w=16)
>>> a.insert_many([1, 2, 3]); b.insert_many([2, 3, 4])
>>> sorted(a.diff(b).report().keys)
[1, 4]
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from fractions import Fraction

import numpy as np

from .bch import BchSketch
from .errors import DecodeFailed, IncompatibleSketch, KeyRangeError
from .hashing import HashSeeds, checksum_hash, checksum_hash_vec
from .iblt import DecodeOutcome, Iblt, check_key, check_keys, table_size

SUPPORTED_WIDTHS = (8, 16, 24, 32)
MAX_STASH = 64
# Below this many keys the per-key Python path beats numpy call overhead.
_BULK_THRESHOLD = 32


class Status(str, Enum):
    IBLT_CLEAN = "IbltClean"
    STASH_CORRECTED = "StashCorrected"
    FAILED = "Failed"


@dataclass
class ReportOutcome:
    """Result of :meth:`Sketch.report`.

    ``key_data`` is a sorted key array for unsigned sketches and a
    ``{key: sign}`` dict for signed ones; ``keys`` gives it as a set or dict.
    When ``status`` is FAILED the keys are the decoder's best effort and must
    not be trusted.
    """

    key_data: object
    used_stash: bool
    status: Status
    decode: DecodeOutcome | None = field(default=None, repr=False)

    @cached_property
    def keys(self):
        data = self.key_data
        if isinstance(data, np.ndarray):
            return set(data.tolist())
        return data

    def sorted_keys(self) -> list:
        data = self.key_data
        if isinstance(data, np.ndarray):
            return data.tolist()
        return sorted(data)

    @property
    def ok(self) -> bool:
        return self.status is not Status.FAILED


def default_stash(capacity: int, w: int) -> int:
    """min(D, max(8, ceil(log2 U))) with U = 2^w - 1, capped at 64."""
    return min(capacity, max(8, w), MAX_STASH)


def epsilon_to_milli(epsilon) -> int:
    milli = Fraction(epsilon) * 1000
    if milli.denominator != 1 and abs(milli - round(milli)) > Fraction(1, 10**6):
        raise KeyRangeError("epsilon must be a multiple of 0.001")
    milli = round(milli)
    if not 0 <= milli <= 0xFFFF:
        raise KeyRangeError("epsilon out of range")
    return milli


def _fold_checksum(keys: np.ndarray, r, seed) -> int:
    if keys.size >= _BULK_THRESHOLD:
        return int(np.bitwise_xor.reduce(checksum_hash_vec(keys, r, seed)))
    h = 0
    for x in keys.tolist():
        h ^= checksum_hash(x, r, seed)
    return h


class Sketch:
    """Set sketch of difference capacity ``capacity`` with stash parameter ``stash``.

    Sketches combine only when built with identical parameters and seeds.
    """

    signed = False

    def __init__(self, capacity: int, stash: int | None = None, w: int = 32,
                 seeds: HashSeeds | None = None, epsilon=Fraction(1, 10)):
        if w not in SUPPORTED_WIDTHS:
            raise KeyRangeError(f"key width must be one of {SUPPORTED_WIDTHS}")
        if capacity < 1 or capacity > 0xFFFFFFFF:
            raise KeyRangeError("capacity must be in [1, 2^32)")
        if stash is None:
            stash = default_stash(capacity, w)
        if not 1 <= stash <= MAX_STASH:
            raise KeyRangeError(f"stash parameter must be in [1, {MAX_STASH}]")
        self.capacity = int(capacity)
        self.r = int(stash)
        self.w = int(w)
        self.seeds = seeds if seeds is not None else HashSeeds()
        self.epsilon_milli = epsilon_to_milli(epsilon)
        n = table_size(self.capacity, Fraction(self.epsilon_milli, 1000))
        self.iblt = Iblt(n, self.w, self.seeds)
        self.checksum = 0
        self.stash = BchSketch(self.r, self.w)

    @property
    def n(self) -> int:
        return self.iblt.n

    @property
    def epsilon(self) -> Fraction:
        return Fraction(self.epsilon_milli, 1000)

    def params(self) -> tuple:
        return (self.capacity, self.r, self.w, self.seeds, self.epsilon_milli)

    def _blank(self) -> "Sketch":
        return type(self)(self.capacity, self.r, self.w, self.seeds, self.epsilon)

    def copy(self) -> "Sketch":
        out = self._blank()
        out.iblt = self.iblt.copy()
        out.checksum = self.checksum
        out.stash = self.stash.copy()
        return out

    def __eq__(self, other):
        if not isinstance(other, Sketch) or other.signed:
            return NotImplemented
        return (
            self.params() == other.params()
            and self.checksum == other.checksum
            and self.iblt == other.iblt
            and self.stash == other.stash
        )

    def __repr__(self):
        return f"Sketch(capacity={self.capacity}, stash={self.r}, w={self.w}, n={self.n})"

    def is_empty(self) -> bool:
        return self.iblt.is_empty() and self.checksum == 0 and self.stash.is_zero()

    def insert(self, x: int) -> None:
        """Toggle ``x`` in all three components; inserting twice removes it."""
        x = check_key(x, self.w)
        self.iblt.toggle(x)
        self.checksum ^= checksum_hash(x, self.r, self.seeds.checksum_seed)
        self.stash.toggle(x)

    toggle = insert

    def insert_many(self, keys) -> None:
        keys = check_keys(keys, self.w)
        if keys.size < _BULK_THRESHOLD:
            for x in keys.tolist():
                self.insert(x)
            return
        self.iblt.toggle_many(keys)
        self.checksum ^= int(np.bitwise_xor.reduce(checksum_hash_vec(keys, self.r, self.seeds.checksum_seed)))
        self.stash.toggle_many(keys)

    @classmethod
    def from_keys(cls, keys, capacity, stash=None, w=32, seeds=None, epsilon=Fraction(1, 10)) -> "Sketch":
        sk = cls(capacity, stash, w, seeds, epsilon)
        sk.insert_many(list(keys))
        return sk

    def diff(self, other: "Sketch") -> "Sketch":
        """Sketch of the symmetric difference of the two stored sets."""
        if not isinstance(other, Sketch) or other.signed or self.params() != other.params():
            raise IncompatibleSketch("sketches differ in parameters or seeds")
        out = self._blank()
        out.iblt = self.iblt.merge(other.iblt)
        out.checksum = self.checksum ^ other.checksum
        out.stash = self.stash.merge(other.stash)
        return out

    __xor__ = diff

    def report(self, inplace: bool = False) -> ReportOutcome:
        """List the stored keys, falling back to the stash if the checksum disagrees.

        With ``inplace=True`` the sketch is consumed: afterwards its IBLT holds
        the decoder residual and its stash the uncorrected remainder.
        """
        sk = self if inplace else self.copy()
        seed = sk.seeds.checksum_seed
        outcome = sk.iblt.decode()
        s_dec = outcome.recovered_keys
        sk.checksum ^= _fold_checksum(s_dec, sk.r, seed)
        if sk.checksum == 0:
            return ReportOutcome(s_dec, False, Status.IBLT_CLEAN, outcome)
        if s_dec.size >= _BULK_THRESHOLD:
            sk.stash.toggle_many(s_dec)
        else:
            for x in s_dec.tolist():
                sk.stash.toggle(x)
        try:
            correction = np.array(sorted(sk.stash.decode()), dtype=np.uint64)
        except DecodeFailed:
            return ReportOutcome(s_dec, True, Status.FAILED, outcome)
        keys = np.setxor1d(s_dec, correction, assume_unique=True)
        sk.checksum ^= _fold_checksum(correction, sk.r, seed)
        status = Status.STASH_CORRECTED if sk.checksum == 0 else Status.FAILED
        return ReportOutcome(keys, True, status, outcome)
