from __future__ import annotations

import numpy as np
import pytest

from sl2forms.errors import BadModulus, BudgetExceeded, ZeroInverse
from sl2forms.field import (
    FieldCtx,
    enumerate_sl2,
    get_field,
    is_irreducible,
    is_prime,
    random_sl2,
    sl2_order,
)
from sl2forms.linalg import det

FIELD_CASES = [(2, 1), (2, 2), (3, 1), (3, 2), (5, 1), (5, 2), (2, 3), (7, 1)]


@pytest.mark.parametrize("p,m", FIELD_CASES)
def test_field_axioms_on_all_elements(p: int, m: int) -> None:
    ctx = get_field(p, m)
    el = ctx.elements()
    x, y = np.meshgrid(el, el, indexing="ij")
    assert np.array_equal(ctx.add(x, y), ctx.add(y, x))
    assert np.array_equal(ctx.mul(x, y), ctx.mul(y, x))
    assert np.array_equal(ctx.sub(ctx.add(x, y), y), x)
    nz = ctx.nonzero()
    assert np.all(ctx.mul(nz, ctx.inv(nz)) == 1)
    assert np.all(ctx.pow(nz, ctx.q - 1) == 1)


@pytest.mark.parametrize("p,m", FIELD_CASES)
def test_frobenius_is_additive_and_multiplicative(p: int, m: int) -> None:
    ctx = get_field(p, m)
    el = ctx.elements()
    x, y = np.meshgrid(el, el, indexing="ij")
    for e in range(m):
        assert np.array_equal(ctx.frob(ctx.add(x, y), e), ctx.add(ctx.frob(x, e), ctx.frob(y, e)))
        assert np.array_equal(ctx.frob(ctx.mul(x, y), e), ctx.mul(ctx.frob(x, e), ctx.frob(y, e)))
    # F^m = id on F_{p^m}
    assert np.array_equal(ctx.frob(el, m), el)


def test_zero_has_no_inverse() -> None:
    ctx = get_field(5)
    with pytest.raises(ZeroInverse, match="zero has no inverse"):
        ctx.inv(0)
    with pytest.raises(ZeroInverse):
        ctx.element(0) ** -1


def test_scalar_reduces_fractions() -> None:
    from fractions import Fraction

    ctx = get_field(5)
    assert ctx.scalar(Fraction(1, 2)) == 3
    assert ctx.scalar(-1) == 4
    with pytest.raises(ZeroInverse, match="characteristic 5"):
        ctx.scalar(Fraction(1, 5))


def test_bad_moduli_are_rejected() -> None:
    with pytest.raises(BadModulus, match="reducible"):
        FieldCtx(2, 2, modulus=(1, 0, 1))
    with pytest.raises(BadModulus, match="monic"):
        FieldCtx(3, 2, modulus=(1, 0, 2))
    with pytest.raises(BadModulus, match="prime"):
        FieldCtx(4, 1)
    with pytest.raises(BadModulus, match="extension degree"):
        FieldCtx(2, 5)
    assert is_irreducible((1, 1, 1), 2)
    assert not is_irreducible((1, 0, 1), 2)


def test_is_prime_small_values() -> None:
    assert [n for n in range(32) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31]


def test_element_wrapper_arithmetic() -> None:
    ctx = get_field(3, 2)
    g = ctx.element(ctx.gen)
    assert g ** (ctx.q - 1) == ctx.element(1)
    assert (g * g) / g == g
    assert g + 0 == g
    assert -g + g == ctx.element(0)


@pytest.mark.parametrize("p,m", [(2, 1), (2, 2), (3, 1), (5, 1)])
def test_enumerate_sl2_counts_and_determinants(p: int, m: int) -> None:
    ctx = get_field(p, m)
    mats = enumerate_sl2(ctx)
    assert mats.shape == (sl2_order(ctx.q), 2, 2)
    assert len({tuple(M.ravel()) for M in mats}) == sl2_order(ctx.q)
    assert all(det(ctx, M) == 1 for M in mats)


def test_enumerate_sl2_respects_budget() -> None:
    with pytest.raises(BudgetExceeded, match="enumeration budget"):
        enumerate_sl2(get_field(31, 2), budget=1000)


def test_random_sl2_samples_have_determinant_one() -> None:
    ctx = get_field(5, 2)
    mats = random_sl2(ctx, np.random.default_rng(7), 500)
    assert mats.shape == (500, 2, 2)
    assert all(det(ctx, M) == 1 for M in mats)
