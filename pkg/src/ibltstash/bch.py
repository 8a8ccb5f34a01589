"""BCH syndrome sketches: the binary stash and its signed ternary counterpart.

A binary sketch of capacity ``r`` stores the odd power sums
``s_j = sum(x^j for x in S)`` for ``j = 1, 3, ..., 2r - 1`` over GF(2^w), with
each key used directly as its own nonzero field element.  Even power sums
follow from ``s_2j = s_j^2`` and are rebuilt at decode time.

The ternary sketch stores ``s_j = sum(sign * a(x)^j)`` for ``j = 1..2r`` over
GF(3^m), where ``a(x)`` is the base-3 digit packing of ``x`` and signs are
the GF(3) elements 1 (+1) and 2 (-1).

Decoding runs Berlekamp-Massey, finds the locator roots by trace splitting,
recovers ternary error values with Forney's formula, and finally re-encodes
the candidate set.  Any inconsistency raises :class:`DecodeFailed`.  An
overloaded sketch can still alias to a different set, but only to one that
differs from the true set in more than 2r keys.
"""

from __future__ import annotations

import numpy as np

from . import polys
from .errors import DecodeFailed, IncompatibleSketch, KeyRangeError
from .fields import GF2Field, GF3Field, binary_field, g_decode, g_encode, ternary_field, trits_for_width
from .iblt import check_key, check_keys

PLUS, MINUS = 1, 2


def normalize_sign(sign: int) -> int:
    """Map +1/-1 (or the GF(3) codes 1/2) onto 1/2."""
    if sign == 1:
        return PLUS
    if sign in (-1, 2):
        return MINUS
    raise ValueError(f"sign must be +1 or -1, got {sign}")


class BchSketch:
    """Odd-power syndromes over GF(2^w); corrects up to ``r`` keys."""

    def __init__(self, r: int, w: int = 32, field: GF2Field | None = None):
        if r < 1:
            raise KeyRangeError("capacity must be at least 1")
        self.field = field if field is not None else binary_field(w)
        self.w = self.field.w
        self.r = int(r)
        self.syndromes = [0] * self.r

    @classmethod
    def from_keys(cls, keys, r, w=32, field=None) -> "BchSketch":
        sk = cls(r, w, field)
        for x in keys:
            sk.toggle(x)
        return sk

    def copy(self) -> "BchSketch":
        out = BchSketch(self.r, field=self.field)
        out.syndromes = list(self.syndromes)
        return out

    def __eq__(self, other):
        if not isinstance(other, BchSketch):
            return NotImplemented
        return (self.r, self.w, self.field.params) == (other.r, other.w, other.field.params) and (
            self.syndromes == other.syndromes
        )

    def __repr__(self):
        return f"BchSketch(r={self.r}, w={self.w})"

    def is_zero(self) -> bool:
        return not any(self.syndromes)

    def toggle(self, x: int) -> None:
        """Insert or delete ``x`` (the same operation in characteristic 2)."""
        x = check_key(x, self.w)
        F, s = self.field, self.syndromes
        x2 = F.sqr(x)
        p = x
        for j in range(self.r):
            s[j] ^= p
            p = F.mul(p, x2)

    def toggle_many(self, keys) -> None:
        keys = check_keys(keys, self.w)
        if not keys.size:
            return
        F = self.field
        x2 = F.mul_vec(keys, keys)
        p = keys
        for j in range(self.r):
            self.syndromes[j] ^= int(np.bitwise_xor.reduce(p))
            if j + 1 < self.r:
                p = F.mul_vec(p, x2)

    def _check_compatible(self, other):
        if (self.r, self.w, self.field.params) != (other.r, other.w, other.field.params):
            raise IncompatibleSketch("BCH sketches differ in capacity or field")

    def merge(self, other: "BchSketch") -> "BchSketch":
        self._check_compatible(other)
        out = self.copy()
        out.syndromes = [a ^ b for a, b in zip(self.syndromes, other.syndromes)]
        return out

    __xor__ = merge

    def full_syndromes(self) -> list:
        """s_1 .. s_2r, with the even ones derived by squaring."""
        F = self.field
        full = [0] * (2 * self.r)
        for j, v in enumerate(self.syndromes):
            full[2 * j] = v
        for k in range(1, self.r + 1):
            full[2 * k - 1] = F.sqr(full[k - 1])
        return full

    def decode(self) -> set:
        if self.is_zero():
            return set()
        F = self.field
        locator, length = polys.berlekamp_massey(F, self.full_syndromes())
        if length > self.r or len(locator) != length + 1:
            raise DecodeFailed("more keys than the sketch capacity")
        roots = polys.find_roots(F, locator[::-1])
        if roots is None or len(roots) != length or 0 in roots:
            raise DecodeFailed("locator does not split into distinct nonzero roots")
        keys = set(roots)
        if BchSketch.from_keys(keys, self.r, field=F).syndromes != self.syndromes:
            raise DecodeFailed("re-encoded candidate does not match the sketch")
        return keys


class TernaryBchSketch:
    """Signed power-sum syndromes over GF(3^m); corrects up to ``r`` signed keys.

    ``m`` is the smallest trit count able to encode every ``w``-bit key.
    """

    def __init__(self, r: int, w: int = 32, field: GF3Field | None = None):
        if r < 1:
            raise KeyRangeError("capacity must be at least 1")
        self.w = int(w)
        m = trits_for_width(self.w)
        self.field = field if field is not None else ternary_field(m)
        if 3**self.field.m < (1 << self.w):
            raise KeyRangeError("ternary field too small for the key width")
        self.m = self.field.m
        self.r = int(r)
        self.syndromes = [0] * (2 * self.r)

    @classmethod
    def from_signed(cls, items, r, w=32, field=None) -> "TernaryBchSketch":
        """Build from (key, sign) pairs or a {key: sign} mapping."""
        sk = cls(r, w, field)
        if hasattr(items, "items"):
            items = items.items()
        for x, sign in items:
            sk.toggle(x, sign)
        return sk

    def copy(self) -> "TernaryBchSketch":
        out = TernaryBchSketch(self.r, self.w, self.field)
        out.syndromes = list(self.syndromes)
        return out

    def __eq__(self, other):
        if not isinstance(other, TernaryBchSketch):
            return NotImplemented
        return (self.r, self.w, self.field.params) == (other.r, other.w, other.field.params) and (
            self.syndromes == other.syndromes
        )

    def __repr__(self):
        return f"TernaryBchSketch(r={self.r}, w={self.w}, m={self.m})"

    def is_zero(self) -> bool:
        return not any(self.syndromes)

    def embed(self, x: int) -> int:
        return g_encode(check_key(x, self.w), self.m)

    def toggle(self, x: int, sign: int = PLUS) -> None:
        """Add ``sign * a(x)^j`` to every syndrome."""
        sign = normalize_sign(sign)
        F, s = self.field, self.syndromes
        a = self.embed(x)
        p = a
        for j in range(2 * self.r):
            s[j] = F.add(s[j], p) if sign == PLUS else F.sub(s[j], p)
            p = F.mul(p, a)

    def _check_compatible(self, other):
        if (self.r, self.w, self.field.params) != (other.r, other.w, other.field.params):
            raise IncompatibleSketch("ternary sketches differ in capacity or field")

    def merge(self, other: "TernaryBchSketch") -> "TernaryBchSketch":
        """Syndrome-wise ``self - other``: surplus of ``self`` decodes as +."""
        self._check_compatible(other)
        F = self.field
        out = self.copy()
        out.syndromes = [F.sub(a, b) for a, b in zip(self.syndromes, other.syndromes)]
        return out

    __sub__ = merge

    def negated(self) -> "TernaryBchSketch":
        out = self.copy()
        out.syndromes = [self.field.neg(v) for v in self.syndromes]
        return out

    def decode(self) -> dict:
        """Recover ``{key: sign}`` with signs coded 1 (+) and 2 (-)."""
        if self.is_zero():
            return {}
        F = self.field
        s = self.syndromes
        locator, length = polys.berlekamp_massey(F, s)
        if length > self.r or len(locator) != length + 1:
            raise DecodeFailed("more keys than the sketch capacity")
        roots = polys.find_roots(F, locator[::-1])
        if roots is None or len(roots) != length or 0 in roots:
            raise DecodeFailed("locator does not split into distinct nonzero roots")
        # Forney: e = -Omega(X^-1) / Lambda'(X^-1), Omega = S * Lambda mod z^2r.
        omega = polys.mul(F, polys.trim(list(s)), locator)[: 2 * self.r]
        dlocator = polys.derivative(F, locator)
        out = {}
        max_key = (1 << self.w) - 1
        for X in roots:
            xinv = F.inv(X)
            den = polys.evaluate(F, dlocator, xinv)
            if den == 0:
                raise DecodeFailed("repeated locator")
            e = F.neg(F.div(polys.evaluate(F, omega, xinv), den))
            if e not in (PLUS, MINUS):
                raise DecodeFailed("error value outside {1, 2}")
            key = g_decode(X, self.m)
            if not 1 <= key <= max_key:
                raise DecodeFailed("locator is not a valid key")
            out[key] = e
        if TernaryBchSketch.from_signed(out, self.r, self.w, F).syndromes != self.syndromes:
            raise DecodeFailed("re-encoded candidate does not match the sketch")
        return out
