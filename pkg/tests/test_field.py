import random

import pytest
from hypothesis import given, settings, strategies as st

from chevalab.errors import NoModulusInTable, NonPrime, TooLarge
from chevalab.field import (
    BOTTOM,
    FieldCtx,
    enumerate_ring,
    field_make,
    is_irreducible,
    trunc_make,
    ts_mul,
    ts_val,
)


def test_prime_field_basics():
    f2 = field_make(2)
    assert f2.q == 2
    assert f2.add(1, 1) == 0
    assert f2.mul(1, 1) == 1
    f5 = field_make(5)
    assert f5.mul(3, 4) == 2
    assert f5.inv(2) == 3
    assert f5.neg(3) == 2


def test_nonprime_rejected():
    with pytest.raises(NonPrime):
        field_make(4)
    with pytest.raises(NonPrime):
        field_make(1)


def test_size_guards():
    with pytest.raises((TooLarge, NoModulusInTable)):
        field_make(257)
    with pytest.raises((TooLarge, NoModulusInTable)):
        field_make(2, 17)
    with pytest.raises(TooLarge):
        field_make(251, 9)  # q above 2^16


def test_f4_modulus_is_lex_least():
    f4 = field_make(2, 2)
    # x^2 + x + 1 is the only irreducible quadratic over F_2
    assert f4.modulus == (1, 1, 1)
    a = 2  # the class of x
    assert f4.mul(a, a) == f4.add(a, 1)  # x^2 = x + 1


def test_f9_modulus():
    f9 = field_make(3, 2)
    assert f9.modulus[-1] == 1
    assert is_irreducible(f9.modulus, 3)
    # lex-least monic irreducible quadratic over F_3 is x^2 + 1
    assert f9.modulus == (1, 0, 1)


@pytest.mark.parametrize("ell,k", [(2, 1), (3, 1), (5, 1), (2, 2), (3, 2), (2, 4)])
def test_field_axioms_sampled(ell, k):
    f = field_make(ell, k)
    rng = random.Random(11)
    els = list(f.elements())
    assert len(els) == f.q
    for _ in range(300):
        a, b, c = (rng.randrange(f.q) for _ in range(3))
        assert f.add(a, b) == f.add(b, a)
        assert f.mul(a, b) == f.mul(b, a)
        assert f.add(f.add(a, b), c) == f.add(a, f.add(b, c))
        assert f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c))
        assert f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c))
        assert f.add(a, f.neg(a)) == 0
        if a != 0:
            assert f.mul(a, f.inv(a)) == 1


@given(a=st.integers(0, 6), b=st.integers(0, 6), c=st.integers(0, 6))
@settings(max_examples=200, deadline=None)
def test_f7_ring_laws_hypothesis(a, b, c):
    f = field_make(7)
    assert f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c))
    assert f.sub(a, b) == f.add(a, f.neg(b))
    assert f.pow(a, 7) == a  # Frobenius fixes F_7


def test_digits_roundtrip():
    f = field_make(3, 2)
    for e in f.elements():
        assert f.encode(f.digits(e)) == e


def test_series_mul_truncates():
    r = trunc_make(field_make(2), 1)
    one_plus_t = (1, 1)
    assert ts_mul(r, one_plus_t, one_plus_t) == (1, 0)  # (1+t)^2 = 1 + t^2 = 1
    assert ts_mul(r, (0, 1), (0, 1)) == (0, 0)  # t * t dies at m = 1


def test_series_mul_char3():
    r = trunc_make(field_make(3), 2)
    assert ts_mul(r, (1, 1, 0), (1, 2, 0)) == (1, 0, 2)


def test_valuation():
    r = trunc_make(field_make(2), 2)
    assert ts_val(r, (1, 0, 0)) == 0
    assert ts_val(r, (0, 0, 1)) == 2
    assert ts_val(r, (0, 0, 0)) is BOTTOM
    assert r.val_capped((0, 0, 0)) == 3


def test_val_submultiplicative_exact_for_nonzero_product():
    r = trunc_make(field_make(3), 2)
    rng = random.Random(5)
    for _ in range(500):
        a = tuple(rng.randrange(3) for _ in range(3))
        b = tuple(rng.randrange(3) for _ in range(3))
        p = ts_mul(r, a, b)
        va, vb, vp = ts_val(r, a), ts_val(r, b), ts_val(r, p)
        if va is not BOTTOM and vb is not BOTTOM and va + vb <= 2:
            assert vp == va + vb


def test_ring_index_roundtrip_and_order():
    r = trunc_make(field_make(3), 1)
    els = list(enumerate_ring(r))
    assert len(els) == 9
    assert els[0] == (0, 0)
    assert els[1] == (0, 1)  # t^1 coefficient varies fastest
    assert els[3] == (1, 0)  # t^0 coefficient is outermost
    assert els[-1] == (2, 2)
    for i, e in enumerate(els):
        assert r.index(e) == i
        assert r.from_index(i) == e


def test_enumeration_guard():
    with pytest.raises(TooLarge):
        list(enumerate_ring(trunc_make(field_make(251), 31)))


def test_ctx_equality_and_hash():
    a = field_make(2, 2)
    b = field_make(2, 2)
    assert a == b and hash(a) == hash(b)
    assert a != field_make(2)
    assert isinstance(a, FieldCtx)
