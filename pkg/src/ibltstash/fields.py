"""Finite-field arithmetic over GF(2^w) and GF(3^m).

Binary field elements are plain ints read as polynomials over GF(2).  Ternary
field elements use the packed quadbit layout: quadbit ``i`` (bits ``4i..4i+3``)
holds the coefficient of ``z^i``, always in ``{0, 1, 2}`` on output.  The
quadbit form is what arithmetic runs on; the 2-bit-per-trit form only exists
on the wire (see :mod:`ibltstash.serialize`).

The module-level functions (``gf2_mul``, ``gf3_mul``, ...) are the reference
arithmetic.  :class:`GF2Field` and :class:`GF3Field` wrap them for the sketch
code and add log/antilog tables for small fields; the tables are generated
from the reference multiply, and the tests check them against it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import KeyRangeError, MalformedTrits, WidthMismatch, ZeroInverse

# Irreducible polynomials over GF(2), indexed by degree.  Degree 8 is the AES
# polynomial; the others are primitive.
GF2_POLYS = {
    8: (1 << 8) | (1 << 4) | (1 << 3) | (1 << 1) | 1,
    16: (1 << 16) | (1 << 12) | (1 << 3) | (1 << 1) | 1,
    24: (1 << 24) | (1 << 7) | (1 << 2) | (1 << 1) | 1,
    32: (1 << 32) | (1 << 22) | (1 << 2) | (1 << 1) | 1,
}

# Primitive polynomials over GF(3) as {degree: {power: coefficient}}.
_GF3_POLY_TERMS = {
    2: {2: 1, 1: 1, 0: 2},
    3: {3: 1, 1: 2, 0: 1},
    6: {6: 1, 1: 1, 0: 2},
    11: {11: 1, 2: 2, 0: 1},
    16: {16: 1, 7: 1, 0: 2},
    21: {21: 1, 5: 2, 0: 1},
}

# Fields up to this many elements get log/antilog tables.
TABLE_LIMIT = 3**11


def _pack_terms(terms):
    return sum(c << (4 * e) for e, c in terms.items())


GF3_POLYS = {m: _pack_terms(t) for m, t in _GF3_POLY_TERMS.items()}


def trits_for_width(w: int) -> int:
    """Smallest m with 3^m >= 2^w, so every w-bit key has an m-trit encoding."""
    m = 0
    while 3**m < (1 << w):
        m += 1
    return m


# ---------------------------------------------------------------------------
# GF(2^w)


def clmul(a: int, b: int) -> int:
    """Carry-less product of two bit strings."""
    if a.bit_length() < b.bit_length():
        a, b = b, a
    r = 0
    if b < 256:
        while b:
            if b & 1:
                r ^= a
            a <<= 1
            b >>= 1
        return r
    # Four bits of b at a time against the 16 carry-less multiples of a.
    a2 = a << 1
    a4 = a << 2
    a8 = a << 3
    a3, a5, a6 = a2 ^ a, a4 ^ a, a4 ^ a2
    a7 = a6 ^ a
    t = (0, a, a2, a3, a4, a5, a6, a7, a8, a8 ^ a, a8 ^ a2, a8 ^ a3, a8 ^ a4, a8 ^ a5, a8 ^ a6, a8 ^ a7)
    sh = 0
    while b:
        r ^= t[b & 15] << sh
        b >>= 4
        sh += 4
    return r


def gf2_reduce(z: int, poly: int, w: int) -> int:
    """Remainder of ``z`` modulo ``poly`` (degree ``w``) over GF(2)."""
    low = poly ^ (1 << w)
    mask = (1 << w) - 1
    # Fold the high part down through x^w = low; each fold lowers the degree.
    while z >> w:
        z = (z & mask) ^ clmul(z >> w, low)
    return z


def _gf2_polymod(a: int, b: int) -> int:
    db = b.bit_length()
    while a.bit_length() >= db:
        a ^= b << (a.bit_length() - db)
    return a


def _gf2_polygcd(a: int, b: int) -> int:
    while b:
        a, b = b, _gf2_polymod(a, b)
    return a


def gf2_is_irreducible(poly: int) -> bool:
    """Ben-Or irreducibility test for a polynomial over GF(2)."""
    w = poly.bit_length() - 1
    if w < 1:
        return False
    xp = 2  # x^(2^i) mod poly
    for _ in range(w // 2):
        xp = gf2_reduce(clmul(xp, xp), poly, w)
        if _gf2_polygcd(poly, xp ^ 2) != 1:
            return False
    return True


@dataclass(frozen=True)
class FieldParams2:
    """Width and modulus of GF(2^w)."""

    w: int
    poly: int

    def __post_init__(self):
        if not 2 <= self.w <= 64:
            raise KeyRangeError(f"unsupported binary field width {self.w}")
        if self.poly.bit_length() != self.w + 1:
            raise ValueError(f"modulus {self.poly:#x} does not have degree {self.w}")
        if GF2_POLYS.get(self.w) != self.poly and not gf2_is_irreducible(self.poly):
            raise ValueError(f"modulus {self.poly:#x} is reducible")

    @classmethod
    def for_width(cls, w: int) -> "FieldParams2":
        if w not in GF2_POLYS:
            raise KeyRangeError(f"no shipped modulus for width {w}")
        return cls(w, GF2_POLYS[w])


def gf2_mul(a: int, b: int, p: FieldParams2) -> int:
    """Multiply in GF(2^w): carry-less product, then reduction modulo ``p.poly``."""
    return gf2_reduce(clmul(a, b), p.poly, p.w)


def gf2_inv(a: int, p: FieldParams2) -> int:
    """Inverse as a^(2^w - 2)."""
    if a == 0:
        raise ZeroInverse("0 has no inverse")
    result, base, e = 1, a, (1 << p.w) - 2
    while e:
        if e & 1:
            result = gf2_mul(result, base, p)
        base = gf2_mul(base, base, p)
        e >>= 1
    return result


# ---------------------------------------------------------------------------
# GF(3^m), packed quadbits


@lru_cache(maxsize=None)
def _rep(nibble: int, count: int) -> int:
    """``nibble`` repeated in ``count`` consecutive quadbits."""
    return nibble * ((1 << (4 * count)) - 1) // 15


def _nquads(x: int) -> int:
    return (x.bit_length() + 3) >> 2


def _mod3(x: int) -> int:
    n = _nquads(x)
    a = (x + _rep(1, n)) & _rep(4, n)
    return x - ((a >> 2) + (a >> 1))


def _quads(x: int):
    while x:
        yield x & 0xF
        x >>= 4


def mod3(x: int) -> int:
    """Reduce every quadbit of ``x`` modulo 3.

    Only valid when each quadbit is at most 5: quadbits 3..5 are exactly those
    for which ``q + 1`` sets bit 2, and 3 is subtracted from them.
    """
    assert all(q <= 5 for q in _quads(x)), "mod3 needs quadbits in [0, 5]"
    return _mod3(x)


def _check_trits(v: int, m: int | None = None) -> None:
    if v < 0:
        raise MalformedTrits("negative packed value")
    if m is not None and v >> (4 * m):
        raise WidthMismatch(f"value {v:#x} is wider than {m} trits")
    if any(q > 2 for q in _quads(v)):
        raise MalformedTrits(f"{v:#x} has a quadbit outside {{0,1,2}}")


def g_encode(x: int, m: int) -> int:
    """Pack the base-3 digits of ``x`` into quadbits, least significant first."""
    if not 0 <= x < 3**m:
        raise KeyRangeError(f"{x} does not fit in {m} trits")
    out, j = 0, 0
    for _ in range(m):
        out += (x % 3) << j
        x //= 3
        j += 4
    return out


def g_decode(v: int, m: int | None = None) -> int:
    """Inverse of :func:`g_encode` (Horner evaluation, most significant trit first)."""
    _check_trits(v, m)
    if m is None:
        m = _nquads(v)
    x, j = 0, 4 * (m - 1)
    for _ in range(m):
        x = x * 3 + ((v >> j) & 0x3)
        j -= 4
    return x


def gf3_add(a: int, b: int, m: int | None = None) -> int:
    if m is not None:
        _check_trits(a, m)
        _check_trits(b, m)
    return _mod3(a + b)


def gf3_neg(a: int, m: int | None = None) -> int:
    if m is not None:
        _check_trits(a, m)
    # Doubling a quadbit never exceeds 4, so no carries; 2a = -a (mod 3).
    return _mod3(a << 1)


def gf3_sub(a: int, b: int, m: int | None = None) -> int:
    return gf3_add(a, gf3_neg(b, m), m)


@dataclass(frozen=True)
class FieldParams3:
    """Trit width and packed modulus of GF(3^m)."""

    m: int
    poly: int
    poly2: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.m < 1:
            raise KeyRangeError("trit width must be positive")
        _check_trits(self.poly, self.m + 1)
        if (self.poly >> (4 * self.m)) == 0:
            raise ValueError("modulus must have a nonzero leading coefficient")
        object.__setattr__(self, "poly2", _mod3(self.poly << 1))

    @classmethod
    def for_trits(cls, m: int) -> "FieldParams3":
        if m not in GF3_POLYS:
            raise KeyRangeError(f"no shipped ternary modulus for {m} trits")
        return cls(m, GF3_POLYS[m])

    @property
    def lead(self) -> int:
        return self.poly >> (4 * self.m)


def _gf3_mult(a: int, b: int, m: int) -> int:
    """Schoolbook product of two packed polynomials (2m-1 quadbits, unreduced)."""
    z, j = 0, 4 * (m - 1)
    for _ in range(m):
        t = _mod3(((a >> j) & 0x3) * b)
        z = _mod3((z << 4) + t)
        j -= 4
    return z


def _gf3_reduce(x: int, p: FieldParams3) -> int:
    m = p.m
    threes = _rep(3, 2 * m - 1)
    for pos in range(2 * m - 2, m - 1, -1):
        c = (x >> (4 * pos)) & 0xF
        if c:
            # Pad every quadbit by 3 so the subtraction cannot borrow.
            sub = p.poly if c == p.lead else p.poly2
            x = _mod3(x + threes - (sub << (4 * (pos - m))))
    return x


def gf3_mul(a: int, b: int, p: FieldParams3) -> int:
    _check_trits(a, p.m)
    _check_trits(b, p.m)
    return _gf3_reduce(_gf3_mult(a, b, p.m), p)


def gf3_inv(a: int, p: FieldParams3) -> int:
    """Inverse as a^(3^m - 2)."""
    _check_trits(a, p.m)
    if a == 0:
        raise ZeroInverse("0 has no inverse")
    result, base, e = 1, a, 3**p.m - 2
    while e:
        if e & 1:
            result = _gf3_reduce(_gf3_mult(result, base, p.m), p)
        base = _gf3_reduce(_gf3_mult(base, base, p.m), p)
        e >>= 1
    return result


# ---------------------------------------------------------------------------
# Field objects used by the polynomial and syndrome code


def _prime_factors(n: int):
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


class _Field:
    """Shared machinery: exponentiation and optional log tables."""

    characteristic: int
    degree: int
    order: int
    zero = 0
    one = 1

    def __init__(self):
        self._exp = None
        self._log = None

    # subclasses provide _mul_ref, add, sub, neg

    def _find_generator(self):
        q1 = self.order - 1
        factors = _prime_factors(q1)
        g = 2
        while True:
            if all(self._pow_ref(g, q1 // f) != 1 for f in factors):
                return g
            g += 1

    def _pow_ref(self, a, e):
        result = 1
        while e:
            if e & 1:
                result = self._mul_ref(result, a)
            a = self._mul_ref(a, a)
            e >>= 1
        return result

    def _step(self, a, g):
        return self._mul_ref(a, g)

    def build_tables(self):
        """Build log/antilog tables; only sensible for small fields."""
        if self._exp is not None:
            return
        g = self._find_generator()
        q1 = self.order - 1
        exp = [0] * (2 * q1)
        log = {}
        a = 1
        for i in range(q1):
            exp[i] = a
            log[a] = i
            a = self._step(a, g)
        exp[q1:] = exp[:q1]
        self._exp, self._log = exp, log
        self.generator = g

    @property
    def has_tables(self) -> bool:
        return self._exp is not None

    def mul(self, a, b):
        if a == 0 or b == 0:
            return 0
        if self._exp is not None:
            return self._exp[self._log[a] + self._log[b]]
        return self._mul_ref(a, b)

    def sqr(self, a):
        return self.mul(a, a)

    def pow(self, a, e):
        if e == 0:
            return 1
        if a == 0:
            return 0
        if self._exp is not None:
            return self._exp[(self._log[a] * e) % (self.order - 1)]
        return self._pow_ref(a, e)

    def inv(self, a):
        if a == 0:
            raise ZeroInverse("0 has no inverse")
        if self._exp is not None:
            return self._exp[(self.order - 1 - self._log[a]) % (self.order - 1)]
        return self._pow_ref(a, self.order - 2)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def scalar(self, k: int):
        """The element k * 1."""
        return k % self.characteristic

    def basis_element(self, i: int):
        """The field element z^i (i < degree)."""
        raise NotImplementedError


class GF2Field(_Field):
    """GF(2^w) with integer elements; tables for w <= 16."""

    characteristic = 2

    def __init__(self, params: FieldParams2, tables: bool | None = None):
        super().__init__()
        self.params = params
        self.w = self.degree = params.w
        self.order = 1 << params.w
        self._poly = params.poly
        self._low = params.poly ^ (1 << params.w)
        if tables is None:
            tables = self.order <= TABLE_LIMIT
        if tables:
            self.build_tables()
            self._np_exp = np.array(self._exp, dtype=np.uint64)
            np_log = np.zeros(self.order, dtype=np.int64)
            for v, i in self._log.items():
                np_log[v] = i
            self._np_log = np_log

    def __repr__(self):
        return f"GF2Field(w={self.w}, poly={self._poly:#x})"

    def _mul_ref(self, a, b):
        return gf2_reduce(clmul(a, b), self._poly, self.w)

    def inv(self, a):
        if self._exp is not None or a == 0:
            return super().inv(a)
        # Extended Euclid on bit polynomials; keeps u * a = g1 mod poly.
        u, v, g1, g2 = a, self._poly, 1, 0
        while u != 1:
            j = u.bit_length() - v.bit_length()
            if j < 0:
                u, v, g1, g2 = v, u, g2, g1
                j = -j
            u ^= v << j
            g1 ^= g2 << j
        return g1

    def _step(self, a, g):
        if g == 2:
            a <<= 1
            return a ^ self._poly if a >> self.w else a
        return self._mul_ref(a, g)

    @staticmethod
    def add(a, b):
        return a ^ b

    sub = add

    @staticmethod
    def neg(a):
        return a

    def basis_element(self, i):
        return 1 << i

    def mul_vec(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Element-wise product of two uint64 arrays."""
        a = np.asarray(a, dtype=np.uint64)
        b = np.asarray(b, dtype=np.uint64)
        if self._exp is not None:
            nz = (a != 0) & (b != 0)
            idx = self._np_log[a.astype(np.int64)] + self._np_log[b.astype(np.int64)]
            return np.where(nz, self._np_exp[idx], np.uint64(0))
        # Carry-less product bit by bit (fits in 63 bits for w <= 32).
        if self.w > 32:
            raise KeyRangeError("vectorised multiply supports w <= 32")
        z = np.zeros(np.broadcast(a, b).shape, dtype=np.uint64)
        one = np.uint64(1)
        for i in range(self.w):
            bit = (b >> np.uint64(i)) & one
            z ^= (a << np.uint64(i)) * bit
        w = np.uint64(self.w)
        mask = np.uint64((1 << self.w) - 1)
        low_bits = [i for i in range(self.w) if (self._low >> i) & 1]
        while True:
            hi = z >> w
            if not hi.any():
                return z
            z &= mask
            for i in low_bits:
                z ^= hi << np.uint64(i)


class GF3Field(_Field):
    """GF(3^m) over packed quadbit elements; tables when 3^m <= TABLE_LIMIT."""

    characteristic = 3

    def __init__(self, params: FieldParams3, tables: bool | None = None):
        super().__init__()
        self.params = params
        self.m = self.degree = params.m
        self.order = 3**params.m
        if tables is None:
            tables = self.order <= TABLE_LIMIT
        if tables:
            self.build_tables()

    def __repr__(self):
        return f"GF3Field(m={self.m}, poly={self.params.poly:#x})"

    def _mul_ref(self, a, b):
        return _gf3_reduce(_gf3_mult(a, b, self.m), self.params)

    def _step(self, a, g):
        if g == 0x10:
            return _gf3_reduce(a << 4, self.params)
        return self._mul_ref(a, g)

    def _find_generator(self):
        # Try z first: it generates the group whenever the modulus is primitive.
        q1 = self.order - 1
        factors = _prime_factors(q1)
        if self.m > 1 and all(self._pow_ref(0x10, q1 // f) != 1 for f in factors):
            return 0x10
        for x in range(2, self.order):
            g = g_encode(x, self.m)
            if all(self._pow_ref(g, q1 // f) != 1 for f in factors):
                return g
        raise ValueError("modulus is not irreducible")

    @staticmethod
    def add(a, b):
        return _mod3(a + b)

    @staticmethod
    def neg(a):
        return _mod3(a << 1)

    @staticmethod
    def sub(a, b):
        return _mod3(a + _mod3(b << 1))

    def basis_element(self, i):
        return 1 << (4 * i)

    def scalar(self, k):
        return k % 3


@lru_cache(maxsize=None)
def binary_field(w: int) -> GF2Field:
    """Shared GF(2^w) instance for a supported key width."""
    return GF2Field(FieldParams2.for_width(w))


@lru_cache(maxsize=None)
def ternary_field(m: int) -> GF3Field:
    return GF3Field(FieldParams3.for_trits(m))
