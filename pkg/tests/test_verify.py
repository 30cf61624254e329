from __future__ import annotations

import dataclasses

import numpy as np
import pytest

from sl2forms.catalog import CONJUGATORS, ClosedFormRep, FormSpec, GenDatum, build_borel_pair, build_sigma, extended_datum
from sl2forms.errors import ConfigError, DegreeTooLarge, NotUnimodular
from sl2forms.field import enumerate_sl2, get_field
from sl2forms.linalg import polymat_format, polymat_identity, polymat_reduce
from sl2forms.symbolic import parse_poly
from sl2forms.verify import (
    antisymmetric_weights,
    check_borel_pair,
    check_conjugation_identity,
    check_factorization_identity,
    check_frobenius_multiplicative,
    check_ga_homomorphism,
    check_opposite_relation,
    check_sl2_homomorphism,
    check_weyl_element,
    evaluate,
    field_for,
    omega_star,
    psi_star,
    reflect,
    sigma_star,
    tau_sigma_tau,
)

ABCD = ("a", "b", "c", "d")


def _borel(form: str, p: int, params: str) -> GenDatum:
    return build_borel_pair(FormSpec.make(form, p, params))


def test_field_for_picks_smallest_sufficient_field() -> None:
    assert field_for(5, degree=3).q == 5
    assert field_for(2).q == 4
    assert field_for(3, degree=3, twist=1).q == 9
    assert field_for(2, degree=100).q == 16


def test_borel_pair_passes_symbolically() -> None:
    report = check_borel_pair(_borel("borel:I", 5, "e1=0"))
    assert report.passed
    assert report.backend == "symbolic"
    assert report.checked_relations == ["ga_additive", "torus_weights_sum_zero", "torus_conjugation"]


def test_wrong_weights_break_torus_conjugation() -> None:
    datum = dataclasses.replace(_borel("borel:I", 5, "e1=0"), weights=(2, 1, -1, -2))
    report = check_borel_pair(datum)
    assert not report.passed
    assert report.failed_relation == "torus_conjugation"
    assert report.difference is not None
    assert report.counterexample is not None and report.counterexample["u"] != 1


def test_non_additive_phi_fails_with_difference() -> None:
    phi = (
        (parse_poly("1", 3, ("t",)), parse_poly("t^2", 3, ("t",))),
        (parse_poly("0", 3, ("t",)), parse_poly("1", 3, ("t",))),
    )
    report = check_ga_homomorphism(phi)
    assert not report.passed
    assert report.backend == "symbolic"
    assert report.failed_relation == "ga_additive"
    assert "entry [1, 2]" in (report.difference or "")
    # over F_2 squaring is additive
    phi2 = tuple(tuple(parse_poly(str(f), 2, ("t",)) for f in row) for row in phi)
    assert check_ga_homomorphism(phi2).passed


def test_exhaustive_backend_names_its_fields() -> None:
    report = check_ga_homomorphism(_borel("borel:I", 5, "e1=0").phi_plus, mode="exhaustive")
    assert report.passed
    assert report.backend == "exhaustive(q=5,25)"
    assert report.fields == [5, 25]


def test_opposite_relation_on_extended_pair() -> None:
    report = check_opposite_relation(extended_datum(FormSpec.make("borel:I", 5, "e1=0")))
    assert report.passed
    assert report.backend.startswith("exhaustive(q=")
    assert "no symbolic backend" in report.note


def test_opposite_relation_rejects_trivial_phi_minus() -> None:
    datum = extended_datum(FormSpec.make("borel:I", 5, "e1=0"))
    broken = datum.with_phi_minus(polymat_identity(5, ("s",), 4))
    report = check_opposite_relation(broken)
    assert not report.passed
    assert report.failed_relation == "opposite_unipotent"
    assert report.counterexample["s"] != 0


def test_evaluate_identity_and_determinant_guard() -> None:
    ctx = get_field(3, 2)
    rep = build_sigma(FormSpec.make("star:IX", 3, "e1=0"))
    assert np.array_equal(evaluate(rep, ctx, np.eye(2, dtype=np.int64)), np.eye(4, dtype=np.int64))
    with pytest.raises(NotUnimodular):
        evaluate(rep, ctx, np.array([[1, 1], [0, 2]]))


def test_triple_product_matches_closed_star_form() -> None:
    spec = FormSpec.make("borel:I", 5, "e1=0")
    ctx = get_field(5)
    G = enumerate_sl2(ctx)
    by_triple = evaluate(extended_datum(spec), ctx, G)
    closed = evaluate(build_sigma(FormSpec.make("star:I", 5, "e1=0")), ctx, G)
    assert np.array_equal(by_triple, closed)


def test_sl2_homomorphism_symbolic_and_twisted() -> None:
    untwisted = check_sl2_homomorphism(build_sigma(FormSpec.make("star:IX", 3, "e1=0")))
    assert untwisted.passed and untwisted.backend == "symbolic"
    twisted_rep = build_sigma(FormSpec.make("star:IX", 3, "e1=1"))
    twisted = check_sl2_homomorphism(twisted_rep)
    assert twisted.passed
    assert "frobenius_multiplicative" in twisted.checked_relations
    with pytest.raises(DegreeTooLarge):
        check_sl2_homomorphism(twisted_rep, mode="symbolic")


@pytest.mark.parametrize("form,p,params", [("star:IX", 3, "e1=0"), ("sharp:XV", 3, "e2=0,e3=0"), ("sharp:I", 5, "e1=0")])
def test_reflection_is_an_involution_keeping_homomorphisms(form: str, p: int, params: str) -> None:
    rep = build_sigma(FormSpec.make(form, p, params))
    reflected = reflect(rep)
    assert polymat_format(reflect(reflected).entries) == polymat_format(rep.entries)
    assert check_sl2_homomorphism(reflected, mode="symbolic").passed


def test_sl2_homomorphism_failure_carries_difference() -> None:
    rows = [["a", "b^2"], ["c", "d"]]
    entries = tuple(tuple(parse_poly(x, 3, ABCD) for x in row) for row in rows)
    report = check_sl2_homomorphism(ClosedFormRep(p=3, entries=entries))
    assert not report.passed
    assert report.failed_relation == "sl2_multiplicative"
    assert report.difference is not None
    assert report.counterexample is not None


def test_generator_datum_needs_exhaustive_mode() -> None:
    datum = extended_datum(FormSpec.make("borel:XXIV", 3, "e2=0,d2=0"))
    with pytest.raises(ConfigError):
        check_sl2_homomorphism(datum, mode="symbolic")
    report = check_sl2_homomorphism(datum)
    assert report.passed and report.backend.startswith("exhaustive")


@pytest.mark.parametrize("p,m", [(2, 2), (3, 2), (5, 2), (7, 1)])
def test_generator_identities(p: int, m: int) -> None:
    ctx = get_field(p, m)
    assert check_weyl_element(ctx)
    assert check_factorization_identity(ctx).passed


def test_frobenius_is_multiplicative_on_sl2() -> None:
    assert check_frobenius_multiplicative(3, 1).passed
    assert check_frobenius_multiplicative(2, 2).passed


def test_conjugator_maps_star_onto_sharp() -> None:
    source = build_sigma(FormSpec.make("star:I", 5, "e1=0"))
    target = build_sigma(FormSpec.make("sharp:I", 5, "e1=0"))
    report = check_conjugation_identity(source, target, CONJUGATORS["6.1"].matrix(5))
    assert report.passed
    wrong = check_conjugation_identity(source, target, np.eye(4, dtype=np.int64))
    assert not wrong.passed and wrong.counterexample is not None


def test_omega_star_reverses_and_negates() -> None:
    assert omega_star((3, 1, -1, -3)) == (3, 1, -1, -3)
    assert omega_star((2, 1, 0, -3)) == (3, 0, -1, -2)


def test_psi_star_keeps_borel_pairs() -> None:
    datum = _borel("borel:IV", 5, "e1=0,e2=1")
    assert check_borel_pair(psi_star(datum)).passed
    assert psi_star(psi_star(datum)).phi_plus == datum.phi_plus


@pytest.mark.parametrize("form,p,params", [("star:I", 5, "e1=0"), ("star:IX", 3, "e1=1"), ("sharp:XV", 3, "e2=1,e3=0")])
def test_involutions_square_to_identity(form: str, p: int, params: str) -> None:
    rep = build_sigma(FormSpec.make(form, p, params))
    base = polymat_reduce(rep.entries)
    assert sigma_star(sigma_star(rep)).entries == base
    assert tau_sigma_tau(tau_sigma_tau(rep)).entries == base


def test_antisymmetric_weights_are_forced_by_phi() -> None:
    phi = _borel("borel:I", 5, "e1=0").phi_plus
    assert antisymmetric_weights(phi, 3) == [(3, 1, -1, -3)]
    assert antisymmetric_weights(phi, 2) == []
