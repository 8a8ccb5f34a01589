import random
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ibltstash.bch import MINUS, PLUS, BchSketch, TernaryBchSketch, normalize_sign
from ibltstash.errors import DecodeFailed, IncompatibleSketch, KeyRangeError, KeyZero
from ibltstash.fields import GF2_POLYS, binary_field, g_encode
from ibltstash.harness import oracles


def test_toggle_twice_is_zero():
    sk = BchSketch(4, 16)
    sk.toggle(999)
    sk.toggle(999)
    assert sk.is_zero() and sk.decode() == set()


def test_single_key_syndromes_w8():
    F = binary_field(8)
    sk = BchSketch.from_keys([0x53], 2, 8)
    assert sk.syndromes == [0x53, F.pow(0x53, 3)]
    assert tuple(sk.syndromes) == oracles.bch_syndromes_ref([0x53], 2, GF2_POLYS[8])


def test_rejects_bad_keys():
    sk = BchSketch(2, 8)
    with pytest.raises(KeyZero):
        sk.toggle(0)
    with pytest.raises(KeyRangeError):
        sk.toggle(256)
    with pytest.raises(KeyRangeError):
        BchSketch(0, 8)


def test_merge_is_symmetric_difference():
    a = BchSketch.from_keys([1, 2], 3, 16)
    b = BchSketch.from_keys([2, 3], 3, 16)
    assert a.merge(b) == BchSketch.from_keys([1, 3], 3, 16)
    assert a.merge(a).is_zero()
    assert a.merge(BchSketch(3, 16)) == a
    with pytest.raises(IncompatibleSketch):
        a.merge(BchSketch(4, 16))


def test_singletons_round_trip_w16():
    rng = random.Random(1)
    for _ in range(100):
        x = rng.randrange(1, 2**16)
        assert BchSketch.from_keys([x], 4, 16).decode() == {x}


def test_exhaustive_w8_r2_against_table():
    # Every set of at most two keys decodes back to itself.
    table = oracles.exhaustive_bch_table(8, 2, GF2_POLYS[8])
    assert len(table) == 1 + 255 + 255 * 254 // 2
    for syn, keys in table.items():
        sk = BchSketch(2, 8)
        sk.syndromes = list(syn)
        assert sk.decode() == set(keys)


def test_w8_r3_pairs_and_sampled_triples():
    for pair in combinations(range(1, 256), 2):
        if pair[0] % 17 == 0:
            assert BchSketch.from_keys(pair, 3, 8).decode() == set(pair)
    rng = random.Random(3)
    for _ in range(5000):
        keys = rng.sample(range(1, 256), 3)
        assert BchSketch.from_keys(keys, 3, 8).decode() == set(keys)


def test_overloaded_sketch_never_lies_silently():
    rng = random.Random(11)
    failed = 0
    for _ in range(300):
        keys = set(rng.sample(range(1, 2**16), 7))
        try:
            got = BchSketch.from_keys(keys, 3, 16).decode()
        except DecodeFailed:
            failed += 1
            continue
        # A returned set re-encodes to the same syndromes, so it differs by more than 2r keys.
        assert len(got ^ keys) > 6
    assert failed > 250


@settings(max_examples=40)
@given(st.sets(st.integers(1, 2**24 - 1), max_size=6))
def test_round_trip_w24(keys):
    assert BchSketch.from_keys(keys, 6, 24).decode() == keys


def test_bulk_toggle_matches_scalar():
    keys = list(range(5, 400, 7))
    a = BchSketch(5, 32)
    a.toggle_many(keys)
    assert a == BchSketch.from_keys(keys, 5, 32)


def test_normalize_sign():
    assert normalize_sign(1) == PLUS and normalize_sign(-1) == MINUS and normalize_sign(2) == MINUS
    with pytest.raises(ValueError):
        normalize_sign(0)


def test_ternary_group_laws():
    sk = TernaryBchSketch(2, 16)
    sk.toggle(77, PLUS)
    sk.toggle(77, MINUS)
    assert sk.is_zero()
    for _ in range(3):
        sk.toggle(77, PLUS)
    assert sk.is_zero()


def test_ternary_single_key_syndromes():
    sk = TernaryBchSketch(1, 16)
    sk.toggle(42)
    a = g_encode(42, sk.m)
    assert sk.syndromes == [a, sk.field.mul(a, a)]


def test_ternary_merge_orientation():
    x = TernaryBchSketch.from_signed({5: PLUS}, 2, 16)
    y = TernaryBchSketch.from_signed({9: PLUS}, 2, 16)
    assert x.merge(y) == TernaryBchSketch.from_signed({5: PLUS, 9: MINUS}, 2, 16)
    assert y.merge(x) == x.merge(y).negated()
    assert x.merge(x).is_zero()
    assert x.merge(y).decode() == {5: PLUS, 9: MINUS}
    with pytest.raises(IncompatibleSketch):
        x.merge(TernaryBchSketch(3, 16))


def test_ternary_random_round_trips():
    rng = random.Random(4)
    for _ in range(500):
        keys = rng.sample(range(1, 2**16), rng.randrange(0, 5))
        items = {x: rng.choice((PLUS, MINUS)) for x in keys}
        assert TernaryBchSketch.from_signed(items, 4, 16).decode() == items


def test_ternary_overload_detected():
    rng = random.Random(8)
    for _ in range(50):
        items = {x: PLUS for x in rng.sample(range(1, 2**16), 6)}
        try:
            got = TernaryBchSketch.from_signed(items, 2, 16).decode()
        except DecodeFailed:
            continue
        assert got != items
