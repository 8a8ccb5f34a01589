"""Brute-force reference implementations, kept deliberately naive.

None of these share code with the production paths beyond the key hash
itself, which is the definition of where a key lives.
"""

from __future__ import annotations

from itertools import combinations

from ..hashing import mix64


# (a) GF(2)[z] multiply by shift-and-add, then reduce by long division.

def gf2_poly_mul(a: int, b: int) -> int:
    out = 0
    shift = 0
    while b:
        if b & 1:
            out ^= a << shift
        b >>= 1
        shift += 1
    return out


def gf2_poly_divmod(a: int, m: int) -> tuple:
    q = 0
    dm = m.bit_length() - 1
    while a and a.bit_length() - 1 >= dm:
        s = a.bit_length() - 1 - dm
        q |= 1 << s
        a ^= m << s
    return q, a


def gf2_mul_longdiv(a: int, b: int, poly: int) -> int:
    return gf2_poly_divmod(gf2_poly_mul(a, b), poly)[1]


def gf2_inv_search(a: int, poly: int) -> int:
    """Exhaustive inverse search; only for tiny fields."""
    w = poly.bit_length() - 1
    for b in range(1, 1 << w):
        if gf2_mul_longdiv(a, b, poly) == 1:
            return b
    raise ZeroDivisionError(a)


# (b) GF(3)[z] on coefficient lists, lowest degree first.

def gf3_poly_mul(a: list, b: list) -> list:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = (out[i + j] + x * y) % 3
    return out


def gf3_poly_mod(a: list, m: list) -> list:
    a = list(a)
    dm = len(m) - 1
    inv_lead = 1 if m[-1] == 1 else 2
    for top in range(len(a) - 1, dm - 1, -1):
        c = (a[top] * inv_lead) % 3
        if c:
            for k in range(dm + 1):
                a[top - dm + k] = (a[top - dm + k] - c * m[k]) % 3
    out = a[:dm] + [0] * max(0, dm - len(a))
    return out


def gf3_mul_symbolic(a: list, b: list, modulus: list) -> list:
    """Product of two degree < m coefficient lists modulo ``modulus`` (length m + 1)."""
    return gf3_poly_mod(gf3_poly_mul(a, b), modulus)


def quads_to_coeffs(v: int, m: int) -> list:
    return [(v >> (4 * i)) & 0xF for i in range(m)]


def coeffs_to_quads(c: list) -> int:
    return sum(d << (4 * i) for i, d in enumerate(c))


# (c) base-3 digits by repeated division.

def base3_digits(x: int, m: int) -> list:
    digits = []
    for _ in range(m):
        x, d = divmod(x, 3)
        digits.append(d)
    if x:
        raise ValueError("does not fit")
    return digits


def from_base3(digits: list) -> int:
    return sum(d * 3**i for i, d in enumerate(digits))


# (d) + (e) IBLT references.

def key_cells(x: int, n: int, index_seeds) -> set:
    return {mix64(s, x) % n for s in index_seeds}


def naive_cells(keys, n: int, index_seeds) -> list:
    """Per-cell rebuild: cell i is the XOR of every key that maps to i."""
    cells = []
    for i in range(n):
        acc = 0
        for x in keys:
            if i in key_cells(x, n, index_seeds):
                acc ^= x
        cells.append(acc)
    return cells


def reference_peel(cells: list, index_seeds, tmax: int | None = None):
    """Round-based peeling that rescans the whole table at the start of each round.

    Within a round, candidates are visited in index order and re-checked just
    before use.  Returns (toggled keys in order, final cells, timed_out).
    """
    cells = list(cells)
    n = len(cells)
    tmax = 2 * n if tmax is None else tmax

    def pure(i):
        return cells[i] != 0 and i in key_cells(cells[i], n, index_seeds)

    toggled = []
    while True:
        round_q = [i for i in range(n) if pure(i)]
        if not round_q:
            return toggled, cells, False
        for i in round_q:
            if not pure(i):
                continue
            x = cells[i]
            for j in key_cells(x, n, index_seeds):
                cells[j] ^= x
            toggled.append(x)
            if len(toggled) >= tmax:
                return toggled, cells, True


# (f) exhaustive small BCH decoder.

def bch_syndromes_ref(keys, r: int, poly: int) -> tuple:
    """Odd power sums s_1, s_3, ..., s_{2r-1} via the long-division multiply."""
    out = []
    for j in range(1, 2 * r, 2):
        acc = 0
        for x in keys:
            p = 1
            for _ in range(j):
                p = gf2_mul_longdiv(p, x, poly)
            acc ^= p
        out.append(acc)
    return tuple(out)


def exhaustive_bch_table(w: int, r: int, poly: int, max_size: int | None = None) -> dict:
    """Map syndrome tuple -> set for every key set of size <= max_size (default r)."""
    max_size = r if max_size is None else max_size
    keys = range(1, 1 << w)
    # power tables so the enumeration stays quick
    pow_tab = {}
    for x in keys:
        p, row = 1, []
        for j in range(1, 2 * r):
            p = gf2_mul_longdiv(p, x, poly)
            if j % 2 == 1:
                row.append(p)
        pow_tab[x] = row
    table = {}
    for size in range(max_size + 1):
        for combo in combinations(keys, size):
            syn = [0] * r
            for x in combo:
                for k, v in enumerate(pow_tab[x]):
                    syn[k] ^= v
            table.setdefault(tuple(syn), frozenset(combo))
    return table
