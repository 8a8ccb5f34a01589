"""Compiled Frobenius and trace maps for polynomials over GF(2^w), w <= 32.

Root finding in wide binary fields spends nearly all its time squaring
polynomials modulo the locator.  These kernels do that work on uint64 arrays
of coefficients (lowest degree first, modulus monic) and agree exactly with
the generic list code in :mod:`ibltstash.polys`.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _mul(a, b, low, w):
    # Carry-less product, then fold the top through x^w = low.
    z = np.uint64(0)
    one = np.uint64(1)
    for i in range(w):
        if (b >> np.uint64(i)) & one:
            z ^= a << np.uint64(i)
    mask = (one << np.uint64(w)) - one
    while z >> np.uint64(w):
        hi = z >> np.uint64(w)
        z &= mask
        for i in range(w):
            if (low >> np.uint64(i)) & one:
                z ^= hi << np.uint64(i)
    return z


@njit(cache=True)
def _sqr_mod(a, f, low, w):
    d = f.shape[0] - 1
    buf = np.zeros(2 * d - 1, dtype=np.uint64)
    for i in range(d):
        if a[i]:
            buf[2 * i] = _mul(a[i], a[i], low, w)
    for k in range(2 * d - 2, d - 1, -1):
        c = buf[k]
        if c:
            buf[k] = 0
            for j in range(d):
                if f[j]:
                    buf[k - d + j] ^= _mul(c, f[j], low, w)
    return buf[:d].copy()


@njit(cache=True)
def frobenius_power(a, f, times, low, w):
    """a^(2^times) mod f for a reduced ``a`` of length deg f."""
    cur = a.copy()
    for _ in range(times):
        cur = _sqr_mod(cur, f, low, w)
    return cur


@njit(cache=True)
def trace_of_linear(f, beta, low, w):
    """Sum of (beta z)^(2^i) mod f for i < w; requires deg f >= 2."""
    d = f.shape[0] - 1
    cur = np.zeros(d, dtype=np.uint64)
    cur[1] = beta
    acc = cur.copy()
    for _ in range(w - 1):
        cur = _sqr_mod(cur, f, low, w)
        acc ^= cur
    return acc
