"""Signed reconciliation: a ternary IBLT whose cells carry a sign trit.

A cell is a vector of ``nu = m + 1`` trits stored as packed quadbits: trits
0..m-1 hold the keysum of base-3 key encodings and trit ``m`` holds the sign.
Inserting ``x`` adds ``(1 | enc(x))`` to each of its cells, deleting adds the
negation ``(2 | -enc(x))``.  Merging subtracts cell-wise, so keys only in the
first set come out with sign 1 and keys only in the second with sign 2.

>>> a = SignedSketch(capacity=8, stash=8, w=16)
>>> b = SignedSketch(capacity=8, stash=8, w=16)
>>> for x in (1, 2, 3): a.insert(x)
>>> for x in (2, 3, 4): b.insert(x)
>>> sorted(a.diff(b).report().keys.items())
[(1, 1), (4, 2)]
"""

from __future__ import annotations

from fractions import Fraction

from .bch import MINUS, PLUS, TernaryBchSketch, normalize_sign
from .errors import DecodeFailed, IncompatibleSketch, KeyRangeError
from .fields import _mod3, _rep, g_decode, g_encode, trits_for_width
from .hashing import HashSeeds, checksum_hash, index_set
from .iblt import DecodeOutcome, check_key, table_size
from .sketch import (
    MAX_STASH,
    SUPPORTED_WIDTHS,
    ReportOutcome,
    Status,
    default_stash,
    epsilon_to_milli,
)


def signed_sym_diff(s1: dict, s2: dict) -> dict:
    """Add signs per key in Z_3; keys whose signs sum to 0 drop out."""
    out = dict(s1)
    for x, s in s2.items():
        t = (out.get(x, 0) + s) % 3
        if t:
            out[x] = t
        else:
            out.pop(x, None)
    return out


def _neg(v: int) -> int:
    return _mod3(v << 1)


class SignedIblt:
    """Ternary IBLT over Z_3^nu."""

    def __init__(self, n: int, w: int = 32, seeds: HashSeeds | None = None):
        if n < 1:
            raise KeyRangeError("an IBLT needs at least one cell")
        self.n = int(n)
        self.w = int(w)
        self.m = trits_for_width(self.w)
        self.nu = self.m + 1
        self.seeds = seeds if seeds is not None else HashSeeds()
        self.cells = [0] * self.n
        self._key_mask = _rep(0xF, self.m)
        self._sign_shift = 4 * self.m

    def copy(self) -> "SignedIblt":
        out = SignedIblt(self.n, self.w, self.seeds)
        out.cells = list(self.cells)
        return out

    def __eq__(self, other):
        if not isinstance(other, SignedIblt):
            return NotImplemented
        return (self.n, self.w, self.seeds, self.cells) == (other.n, other.w, other.seeds, other.cells)

    def __repr__(self):
        return f"SignedIblt(n={self.n}, w={self.w}, nu={self.nu})"

    def unit(self, x: int, sign: int = PLUS) -> int:
        """The cell contribution of ``x`` with the given sign."""
        v = (1 << self._sign_shift) | g_encode(check_key(x, self.w), self.m)
        return v if normalize_sign(sign) == PLUS else _neg(v)

    def add(self, x: int, sign: int = PLUS) -> None:
        v = self.unit(x, sign)
        cells = self.cells
        for i in index_set(x, self.n, self.seeds):
            cells[i] = _mod3(cells[i] + v)

    def insert(self, x: int) -> None:
        self.add(x, PLUS)

    def delete(self, x: int) -> None:
        self.add(x, MINUS)

    def _check_compatible(self, other):
        if not isinstance(other, SignedIblt) or (self.n, self.w, self.seeds) != (other.n, other.w, other.seeds):
            raise IncompatibleSketch("signed IBLTs differ in size, width or seeds")

    def merge(self, other: "SignedIblt") -> "SignedIblt":
        """Cell-wise ``self - other``."""
        self._check_compatible(other)
        out = SignedIblt(self.n, self.w, self.seeds)
        out.cells = [_mod3(a + _neg(b)) for a, b in zip(self.cells, other.cells)]
        return out

    __sub__ = merge

    def is_empty(self) -> bool:
        return not any(self.cells)

    def nonzero_cells(self) -> int:
        return sum(1 for c in self.cells if c)

    def looks_pure(self, i: int):
        """``(key, sign)`` if cell ``i`` plausibly holds a single signed key, else None."""
        v = self.cells[i]
        sign = v >> self._sign_shift
        if sign == 0:
            return None
        keysum = v & self._key_mask
        if sign == MINUS:
            keysum = _neg(keysum)
        x = g_decode(keysum, self.m)
        if not 0 < x < (1 << self.w):
            return None
        if i not in index_set(x, self.n, self.seeds):
            return None
        return x, sign

    def decode(self):
        """Peel signed keys out of the table, mutating it.

        Returns ``(signed_set, outcome)``.  Rounds, queue order and the 2n
        step limit match :meth:`Iblt.decode`.
        """
        n = self.n
        tmax = 2 * n
        recovered: dict = {}
        toggled = []
        stamp = [-1] * n
        q = [i for i in range(n) if self.looks_pure(i) is not None]
        steps, rnd, timed_out = 0, 0, False
        while q and not timed_out:
            nxt = []
            for i in q:
                hit = self.looks_pure(i)
                if hit is None:
                    continue
                x, sign = hit
                # Remove the detected key: delete a positive, insert a negative.
                self.add(x, MINUS if sign == PLUS else PLUS)
                recovered = signed_sym_diff(recovered, {x: sign})
                toggled.append((x, sign))
                for j in index_set(x, n, self.seeds):
                    if stamp[j] != rnd and self.looks_pure(j) is not None:
                        stamp[j] = rnd
                        nxt.append(j)
                steps += 1
                if steps >= tmax:
                    timed_out = True
                    break
            q = [j for j in sorted(nxt) if self.looks_pure(j) is not None]
            rnd += 1
        outcome = DecodeOutcome(
            recovered_keys=set(recovered),
            steps=steps,
            timed_out=timed_out,
            residual_nonzero=not self.is_empty(),
            toggled=toggled,
        )
        return recovered, outcome


def signed_decode(table: SignedIblt):
    return table.decode()


def _signed_hash(x: int, sign: int, r: int, seed: int) -> int:
    """Contribution of ``(x, sign)`` to the arithmetic checksum, mod 2^r."""
    h = checksum_hash(x, r, seed)
    return h if sign == PLUS else (-h) % (1 << r)


class SignedSketch:
    """Signed IBLT, arithmetic r-bit checksum and ternary BCH stash."""

    signed = True

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
        self.iblt = SignedIblt(n, self.w, self.seeds)
        self.checksum = 0
        self.stash = TernaryBchSketch(self.r, self.w)

    @property
    def n(self) -> int:
        return self.iblt.n

    @property
    def nu(self) -> int:
        return self.iblt.nu

    @property
    def epsilon(self) -> Fraction:
        return Fraction(self.epsilon_milli, 1000)

    def params(self) -> tuple:
        return (self.capacity, self.r, self.w, self.seeds, self.epsilon_milli)

    def _blank(self) -> "SignedSketch":
        return type(self)(self.capacity, self.r, self.w, self.seeds, self.epsilon)

    def copy(self) -> "SignedSketch":
        out = self._blank()
        out.iblt = self.iblt.copy()
        out.checksum = self.checksum
        out.stash = self.stash.copy()
        return out

    def __eq__(self, other):
        if not isinstance(other, SignedSketch):
            return NotImplemented
        return (
            self.params() == other.params()
            and self.checksum == other.checksum
            and self.iblt == other.iblt
            and self.stash == other.stash
        )

    def __repr__(self):
        return f"SignedSketch(capacity={self.capacity}, stash={self.r}, w={self.w}, n={self.n})"

    def is_empty(self) -> bool:
        return self.iblt.is_empty() and self.checksum == 0 and self.stash.is_zero()

    def add(self, x: int, sign: int = PLUS) -> None:
        sign = normalize_sign(sign)
        x = check_key(x, self.w)
        self.iblt.add(x, sign)
        self.checksum = (self.checksum + _signed_hash(x, sign, self.r, self.seeds.checksum_seed)) % (1 << self.r)
        self.stash.toggle(x, sign)

    def insert(self, x: int) -> None:
        self.add(x, PLUS)

    toggle = insert

    def delete(self, x: int) -> None:
        self.add(x, MINUS)

    def insert_many(self, keys) -> None:
        for x in keys:
            self.add(int(x), PLUS)

    @classmethod
    def from_keys(cls, keys, capacity, stash=None, w=32, seeds=None, epsilon=Fraction(1, 10)) -> "SignedSketch":
        sk = cls(capacity, stash, w, seeds, epsilon)
        sk.insert_many(keys)
        return sk

    def diff(self, other: "SignedSketch") -> "SignedSketch":
        """Sketch of ``self - other``: sign 1 marks keys only here, sign 2 keys only in ``other``."""
        if not isinstance(other, SignedSketch) or self.params() != other.params():
            raise IncompatibleSketch("sketches differ in parameters or seeds")
        out = self._blank()
        out.iblt = self.iblt.merge(other.iblt)
        out.checksum = (self.checksum - other.checksum) % (1 << self.r)
        out.stash = self.stash.merge(other.stash)
        return out

    __sub__ = diff

    def _checksum_of(self, signed: dict) -> int:
        seed, r = self.seeds.checksum_seed, self.r
        return sum(_signed_hash(x, s, r, seed) for x, s in signed.items()) % (1 << r)

    def report(self, inplace: bool = False) -> ReportOutcome:
        """Recover ``{key: sign}``; see :meth:`Sketch.report` for the status values."""
        sk = self if inplace else self.copy()
        original = sk.checksum
        s_dec, outcome = sk.iblt.decode()
        sk.checksum = (original - sk._checksum_of(s_dec)) % (1 << sk.r)
        if sk.checksum == 0:
            return ReportOutcome(s_dec, False, Status.IBLT_CLEAN, outcome)
        for x, s in s_dec.items():
            sk.stash.toggle(x, MINUS if s == PLUS else PLUS)
        try:
            correction = sk.stash.decode()
        except DecodeFailed:
            return ReportOutcome(s_dec, True, Status.FAILED, outcome)
        keys = signed_sym_diff(s_dec, correction)
        sk.checksum = (original - sk._checksum_of(keys)) % (1 << sk.r)
        status = Status.STASH_CORRECTED if sk.checksum == 0 else Status.FAILED
        return ReportOutcome(keys, True, status, outcome)


def signed_report(sketch: SignedSketch, inplace: bool = False) -> ReportOutcome:
    return sketch.report(inplace)
