import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ibltstash.errors import KeyRangeError, MalformedTrits, WidthMismatch, ZeroInverse
from ibltstash.fields import (
    GF2_POLYS,
    GF3_POLYS,
    FieldParams2,
    FieldParams3,
    GF2Field,
    GF3Field,
    binary_field,
    clmul,
    g_decode,
    g_encode,
    gf2_inv,
    gf2_is_irreducible,
    gf2_mul,
    gf3_add,
    gf3_inv,
    gf3_mul,
    gf3_neg,
    gf3_sub,
    mod3,
    ternary_field,
    trits_for_width,
)
from ibltstash.harness import oracles


def test_gf2_small_field_by_hand():
    # GF(8) with z^3 + z + 1: z * z^2 = z^3 = z + 1
    p = FieldParams2(3, 0b1011)
    assert gf2_mul(0b010, 0b100, p) == 0b011
    assert gf2_inv(0b010, p) == 0b101


def test_gf2_zero_has_no_inverse():
    with pytest.raises(ZeroInverse):
        gf2_inv(0, FieldParams2.for_width(8))


def test_gf2_rejects_reducible_modulus():
    with pytest.raises(ValueError):
        FieldParams2(4, 0b10101)  # (z^2 + z + 1)^2
    with pytest.raises(ValueError):
        FieldParams2(4, 0b111)  # wrong degree


@pytest.mark.parametrize("w", sorted(GF2_POLYS))
def test_shipped_binary_moduli_are_irreducible(w):
    assert gf2_is_irreducible(GF2_POLYS[w])


def test_ternary_moduli_are_irreducible():
    sympy = pytest.importorskip("sympy")
    z = sympy.symbols("z")
    for m, packed in GF3_POLYS.items():
        coeffs = oracles.quads_to_coeffs(packed, m + 1)
        poly = sympy.Poly(list(reversed(coeffs)), z, modulus=3)
        assert poly.is_irreducible, m


@given(st.integers(0, 2**32 - 1), st.integers(0, 2**32 - 1))
def test_clmul_matches_shift_and_add(a, b):
    assert clmul(a, b) == oracles.gf2_poly_mul(a, b)


@pytest.mark.parametrize("w", [16, 24, 32])
@given(data=st.data())
def test_gf2_mul_matches_long_division(w, data):
    a = data.draw(st.integers(0, 2**w - 1))
    b = data.draw(st.integers(0, 2**w - 1))
    p = FieldParams2.for_width(w)
    assert gf2_mul(a, b, p) == oracles.gf2_mul_longdiv(a, b, p.poly)


@pytest.mark.parametrize("w", [16, 24, 32])
@given(data=st.data())
def test_gf2_field_axioms(w, data):
    F = binary_field(w)
    a, b, c = (data.draw(st.integers(0, 2**w - 1)) for _ in range(3))
    assert F.mul(a, b) == F.mul(b, a)
    assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))
    assert F.mul(F.mul(a, b), c) == F.mul(a, F.mul(b, c))
    if a:
        assert F.mul(a, F.inv(a)) == 1


def test_gf2_tables_agree_with_reference():
    F = binary_field(16)
    plain = GF2Field(FieldParams2.for_width(16), tables=False)
    rng = np.random.default_rng(1)
    for a, b in rng.integers(0, 2**16, size=(2000, 2)).tolist():
        assert F.mul(a, b) == plain.mul(a, b)
    for a in rng.integers(1, 2**16, size=200).tolist():
        assert F.inv(a) == plain.inv(a)
        assert F.pow(a, 12345) == plain.pow(a, 12345)


@pytest.mark.parametrize("w", [16, 32])
def test_mul_vec_matches_scalar(w):
    F = binary_field(w)
    rng = np.random.default_rng(w)
    a = rng.integers(0, 2**w, size=500, dtype=np.uint64)
    b = rng.integers(0, 2**w, size=500, dtype=np.uint64)
    got = F.mul_vec(a, b).tolist()
    assert got == [F.mul(x, y) for x, y in zip(a.tolist(), b.tolist())]


def test_mod3_examples():
    assert mod3(0x45) == 0x12
    assert mod3(0x543210) == 0x210210
    with pytest.raises(AssertionError):
        mod3(0x6)


def test_g_encode_examples():
    assert g_encode(5, 2) == 0x12
    assert g_decode(0x12) == 5
    assert g_decode(0x22) == 8
    with pytest.raises(KeyRangeError):
        g_encode(9, 2)


def test_g_decode_rejects_bad_trits():
    with pytest.raises(MalformedTrits):
        g_decode(0x13)
    with pytest.raises(WidthMismatch):
        g_decode(0x111, 2)


@given(st.integers(1, 21).flatmap(lambda m: st.tuples(st.just(m), st.integers(0, 3**m - 1))))
def test_g_encode_round_trip(mx):
    m, x = mx
    v = g_encode(x, m)
    assert g_decode(v, m) == x
    assert oracles.quads_to_coeffs(v, m) == oracles.base3_digits(x, m)


def test_trits_for_width():
    assert [trits_for_width(w) for w in (8, 16, 24, 32)] == [6, 11, 16, 21]


def test_gf3_mul_small_field():
    # GF(9) with z^2 + 1 (irreducible over GF(3)): z * z = -1 = 2
    p = FieldParams3(2, 0x101)
    assert gf3_mul(0x10, 0x10, p) == 0x2


@pytest.mark.parametrize("m", [6, 11, 21])
@given(data=st.data())
def test_gf3_mul_matches_symbolic(m, data):
    p = FieldParams3.for_trits(m)
    a = g_encode(data.draw(st.integers(0, 3**m - 1)), m)
    b = g_encode(data.draw(st.integers(0, 3**m - 1)), m)
    want = oracles.coeffs_to_quads(oracles.gf3_mul_symbolic(
        oracles.quads_to_coeffs(a, m), oracles.quads_to_coeffs(b, m), oracles.quads_to_coeffs(p.poly, m + 1)))
    assert gf3_mul(a, b, p) == want


@given(st.integers(0, 3**11 - 1), st.integers(0, 3**11 - 1))
def test_gf3_additive_group(x, y):
    a, b = g_encode(x, 11), g_encode(y, 11)
    assert gf3_add(a, gf3_neg(a, 11), 11) == 0
    assert gf3_sub(gf3_add(a, b, 11), b, 11) == a
    assert gf3_add(a, gf3_add(a, a)) == 0  # characteristic 3


def test_gf3_inverse_and_errors():
    p = FieldParams3.for_trits(6)
    for x in range(1, 3**6, 7):
        a = g_encode(x, 6)
        assert gf3_mul(a, gf3_inv(a, p), p) == 1
    with pytest.raises(ZeroInverse):
        gf3_inv(0, p)
    with pytest.raises(WidthMismatch):
        gf3_mul(1 << 28, 1, p)


def test_gf3_tables_agree_with_reference():
    F = ternary_field(6)
    plain = GF3Field(FieldParams3.for_trits(6), tables=False)
    assert F.has_tables and not plain.has_tables
    for x in range(0, 3**6, 5):
        for y in range(0, 3**6, 37):
            a, b = g_encode(x, 6), g_encode(y, 6)
            assert F.mul(a, b) == plain.mul(a, b)
