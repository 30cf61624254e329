from __future__ import annotations

import numpy as np
import pytest

from sl2forms.errors import CharMismatch, DegreeTooLarge, ParseError, UnboundVariable, VarMismatch
from sl2forms.field import enumerate_sl2, get_field
from sl2forms.symbolic import (
    MPoly,
    RewriteSystem,
    eval_batch,
    format_poly,
    frobenius,
    is_normal_form,
    mp_eval,
    parse_poly,
    sl2_reduce,
    substitute,
)

ABCD = ("a", "b", "c", "d")

FORMAT_CASES = [
    ("3*a^2*d + b*c", 5, ABCD, "3*a^2*d + b*c"),
    ("7*t", 5, ("t",), "2*t"),
    ("1/2*t", 5, ("t",), "3*t"),
    ("t + t", 2, ("t",), "0"),
    ("(t + 1)^3", 3, ("t",), "t^3 + 1"),
    ("-s", 3, ("s",), "2*s"),
    ("6*s^3 + 6*s^2 + 3*s", 5, ("s",), "s^3 + s^2 + 3*s"),
]


@pytest.mark.parametrize("text,p,vars,expected", FORMAT_CASES)
def test_parse_then_format_normalizes_coefficients(text: str, p: int, vars: tuple[str, ...], expected: str) -> None:
    assert format_poly(parse_poly(text, p, vars)) == expected


def test_parse_rejects_bad_input() -> None:
    with pytest.raises(ParseError, match="undefined in characteristic 5"):
        parse_poly("1/5*t", 5, ("t",))
    with pytest.raises(ParseError, match="unknown variable"):
        parse_poly("x + 1", 3, ("t",))
    with pytest.raises(ParseError, match="unexpected character"):
        parse_poly("t % 2", 3, ("t",))
    with pytest.raises(ParseError, match="trailing input"):
        parse_poly("t t", 3, ("t",))


def test_structural_equality_and_hash() -> None:
    f = parse_poly("a*d + 2", 3, ABCD)
    g = parse_poly("2 + d*a", 3, ABCD)
    assert f == g
    assert hash(f) == hash(g)
    assert MPoly.const(3, ABCD, 4) == 1


def test_mixing_rings_is_an_error() -> None:
    f = parse_poly("t", 3, ("t",))
    with pytest.raises(CharMismatch):
        f + parse_poly("t", 5, ("t",))
    with pytest.raises(VarMismatch):
        f + parse_poly("s", 3, ("s",))


def test_degree_cap() -> None:
    t = MPoly.var(2, ("t",), "t")
    with pytest.raises(DegreeTooLarge, match="exceeds cap"):
        (t**40) * (t**40)


def test_sl2_reduce_rewrites_ad() -> None:
    f = parse_poly("a*d", 5, ABCD)
    reduced = sl2_reduce(f)
    assert format_poly(reduced) == "b*c + 1"
    assert is_normal_form(reduced)
    assert not is_normal_form(f)
    assert format_poly(sl2_reduce(parse_poly("a^2*d^2 - 1", 3, ABCD))) == "b^2*c^2 + 2*b*c"


def test_rewrite_system_finds_every_block() -> None:
    vars = ("a1", "b1", "c1", "d1", "a2", "b2", "c2", "d2")
    rs = RewriteSystem.for_vars(vars)
    assert rs.rules == ("a1*d1 -> b1*c1 + 1", "a2*d2 -> b2*c2 + 1")


@pytest.mark.parametrize("p", [2, 3, 5])
def test_reduction_preserves_values_on_sl2(p: int) -> None:
    ctx = get_field(p)
    f = parse_poly("a^3*d^2 + 2*a*b*d + c", p, ABCD)
    mats = enumerate_sl2(ctx)
    arrays = {"a": mats[:, 0, 0], "b": mats[:, 0, 1], "c": mats[:, 1, 0], "d": mats[:, 1, 1]}
    assert np.array_equal(eval_batch(f, ctx, arrays), eval_batch(sl2_reduce(f), ctx, arrays))


def test_frobenius_shifts_exponents() -> None:
    f = parse_poly("2*t^2 + t + 1", 3, ("t",))
    assert format_poly(frobenius(f, 1)) == "2*t^6 + t^3 + 1"
    assert frobenius(f, 1) == f**3
    assert frobenius(f, 0) is f


def test_mp_eval_matches_batch_evaluation() -> None:
    ctx = get_field(5, 2)
    f = parse_poly("3*s^2 + s + 4", 5, ("s",))
    values = eval_batch(f, ctx, {"s": ctx.elements()})
    for code in (0, 1, 7, 24):
        assert mp_eval(f, {"s": ctx.element(code)}).code == int(values[code])
    with pytest.raises(UnboundVariable):
        mp_eval(f, {"t": ctx.element(1)})
    with pytest.raises(CharMismatch):
        mp_eval(f, {"s": get_field(3).element(1)})


def test_substitute_composes_polynomials() -> None:
    f = parse_poly("t^2 + 1", 5, ("t",))
    s = parse_poly("2*s", 5, ("s",))
    assert format_poly(substitute(f, {"t": s})) == "4*s^2 + 1"
