"""Polynomials over a finite field object, as coefficient lists (lowest degree first).

The zero polynomial is ``[]`` and lists never carry trailing zeros.  ``F`` is
any field from :mod:`ibltstash.fields`.
"""

from __future__ import annotations

import numpy as np

from . import _gf2poly


def _compiled(F, f):
    """True when the numba kernels cover this field and modulus."""
    return F.characteristic == 2 and not F.has_tables and F.degree <= 32 and len(f) >= 3


def _arr(p, size):
    out = np.zeros(size, dtype=np.uint64)
    out[: len(p)] = p
    return out


def trim(p):
    while p and p[-1] == 0:
        p.pop()
    return p


def add(F, a, b):
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] = F.add(out[i], c)
    return trim(out)


def sub(F, a, b):
    out = list(a) + [0] * max(0, len(b) - len(a))
    for i, c in enumerate(b):
        out[i] = F.sub(out[i], c)
    return trim(out)


def scale(F, a, c):
    if c == 0:
        return []
    return trim([F.mul(x, c) for x in a])


def mul(F, a, b):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            if y:
                out[i + j] = F.add(out[i + j], F.mul(x, y))
    return trim(out)


def monic(F, a):
    inv = F.inv(a[-1])
    return [F.mul(x, inv) for x in a]


def divmod_(F, a, b):
    """Quotient and remainder of a / b (b nonzero)."""
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    rem = list(a)
    if len(rem) < len(b):
        return [], trim(rem)
    inv_lead = F.inv(b[-1])
    quot = [0] * (len(rem) - len(b) + 1)
    db = len(b) - 1
    while len(rem) > db:
        c = rem[-1]
        shift = len(rem) - 1 - db
        if c:
            f = F.mul(c, inv_lead)
            quot[shift] = f
            for k in range(db):
                if b[k]:
                    rem[shift + k] = F.sub(rem[shift + k], F.mul(f, b[k]))
        rem.pop()
        trim(rem)
    return trim(quot), rem


def mod(F, a, b):
    return divmod_(F, a, b)[1]


def gcd(F, a, b):
    a, b = trim(list(a)), trim(list(b))
    while b:
        a, b = b, mod(F, a, b)
    return monic(F, a) if a else a


def evaluate(F, p, x):
    acc = 0
    for c in reversed(p):
        acc = F.add(F.mul(acc, x), c)
    return acc


def derivative(F, p):
    return trim([F.mul(F.scalar(i), p[i]) for i in range(1, len(p))])


def frobenius_mod(F, a, f):
    """a^p mod f, where p is the field characteristic."""
    p = F.characteristic
    if not a:
        return []
    out = [0] * (p * (len(a) - 1) + 1)
    for i, c in enumerate(a):
        out[p * i] = F.pow(c, p)
    return mod(F, trim(out), f)


def trace_mod(F, f, beta):
    """Tr(beta * z) mod f, i.e. sum of (beta z)^(p^i) for i < degree of F."""
    if _compiled(F, f):
        acc = _gf2poly.trace_of_linear(_arr(f, len(f)), np.uint64(beta), np.uint64(F.params.poly ^ (1 << F.w)), F.w)
        return trim(acc.tolist())
    cur = mod(F, [0, beta], f)
    acc = list(cur)
    for _ in range(F.degree - 1):
        cur = frobenius_mod(F, cur, f)
        acc = add(F, acc, cur)
    return acc


def splits_distinct(F, f):
    """True if monic f divides z^q - z, i.e. has deg f distinct roots in F."""
    if len(f) <= 2:
        return True
    if _compiled(F, f):
        z = _arr([0, 1], len(f) - 1)
        got = _gf2poly.frobenius_power(z, _arr(f, len(f)), F.degree, np.uint64(F.params.poly ^ (1 << F.w)), F.w)
        return trim(got.tolist()) == [0, 1]
    cur = [0, 1]
    for _ in range(F.degree):
        cur = frobenius_mod(F, cur, f)
    return cur == [0, 1]


def find_roots(F, f):
    """All roots of f if it splits into distinct linear factors, else None.

    Roots are separated by gcds with Tr(beta z) - c for beta running over the
    power basis and c over the prime field; the trace form is nondegenerate,
    so every pair of distinct roots is eventually split.
    """
    f = trim(list(f))
    if not f:
        raise ValueError("the zero polynomial has every element as a root")
    if len(f) == 1:
        return []
    f = monic(F, f)
    if not splits_distinct(F, f):
        return None
    roots = []
    stack = [(f, 0)]
    while stack:
        g, k = stack.pop()
        if len(g) == 2:
            roots.append(F.neg(g[0]))
            continue
        for kk in range(k, k + F.degree):
            t = trace_mod(F, g, F.basis_element(kk % F.degree))
            part = None
            for c in range(F.characteristic):
                d = gcd(F, g, sub(F, t, [c] if c else []))
                if 1 < len(d) < len(g):
                    part = d
                    break
            if part is not None:
                other = monic(F, divmod_(F, g, part)[0])
                stack.append((part, kk + 1))
                stack.append((other, kk + 1))
                break
        else:
            return None
    return roots


def berlekamp_massey(F, s):
    """Shortest connection polynomial C (C[0] = 1) generating the sequence s."""
    c, b = [1], [1]
    length, gap, bd = 0, 1, 1
    for n, sn in enumerate(s):
        d = sn
        for i in range(1, length + 1):
            if i < len(c) and c[i]:
                d = F.add(d, F.mul(c[i], s[n - i]))
        if d == 0:
            gap += 1
            continue
        coef = F.div(d, bd)
        shifted = [0] * gap + [F.mul(coef, x) for x in b]
        new_c = sub(F, c, shifted)
        if 2 * length <= n:
            b, bd = c, d
            length = n + 1 - length
            gap = 1
        else:
            gap += 1
        c = new_c
    return c, length
