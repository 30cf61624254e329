from __future__ import annotations

import numpy as np
import pytest

from sl2forms.catalog import FormSpec, build_borel_pair, build_sigma, extended_datum, phi_minus_closed_form
from sl2forms.errors import InterpolationFailed
from sl2forms.extend import (
    AssembledSigma,
    assemble_sigma,
    assemble_sigma_checked,
    default_degree_bound,
    escalation_ladder,
    extend_form,
    normal_form_monomials,
    solve_phi_minus,
    tau_pair,
)
from sl2forms.field import enumerate_sl2, get_field
from sl2forms.linalg import polymat_format
from sl2forms.verify import check_borel_pair, evaluate

EXTENDABLE_CASES = [
    ("borel:I", 5, "e1=0"),
    ("borel:IX", 3, "e1=0"),
    ("borel:XXIV", 3, "e2=0,d2=0"),
    ("borel:XXVI", 5, "d1=0,d2=0"),
]


@pytest.mark.parametrize("form,p,params", EXTENDABLE_CASES)
def test_solver_recovers_the_closed_phi_minus(form: str, p: int, params: str) -> None:
    spec = FormSpec.make(form, p, params)
    solution = solve_phi_minus(build_borel_pair(spec))
    assert solution.unique
    assert solution.certificate is None
    assert polymat_format(solution.phi_minus) == polymat_format(phi_minus_closed_form(spec))


def test_non_extendable_form_gets_a_certificate() -> None:
    spec = FormSpec.make("borel:XII", 2, "e1=0,d2=0")
    solution = extend_form(spec)
    assert solution.status == "inconsistent"
    assert solution.phi_minus is None and solution.sigma is None
    cert = solution.certificate
    assert cert is not None
    assert cert.field in solution.fields
    assert " = " in cert.equation
    report = solution.to_report(spec)
    assert report.status == "inconsistent" and report.phi_minus is None
    assert "certified up to degree bound" in report.note


def test_extend_form_reports_phi_minus_and_sigma() -> None:
    spec = FormSpec.make("borel:XXIV", 3, "e2=0,d2=0")
    report = extend_form(spec).to_report(spec)
    assert report.status == "unique"
    assert report.phi_minus[3][0] == "s"
    assert report.sigma is not None and len(report.sigma) == 4
    assert report.model_dump(by_alias=True)["schema"] == 1


def test_escalation_ladder() -> None:
    assert escalation_ladder(5, 3) == [1, 2, 4]
    assert escalation_ladder(2, 2) == [2, 4]
    assert escalation_ladder(2, 5) == [3, 4]
    assert escalation_ladder(2, 100) == [4]


def test_default_degree_bound_is_the_top_weight() -> None:
    assert default_degree_bound(build_borel_pair(FormSpec.make("borel:I", 5, "e1=1"))) == 15
    assert default_degree_bound(build_borel_pair(FormSpec.make("borel:XXVI", 3, "d1=0,d2=0"))) == 1


def test_normal_form_monomials_have_the_entry_weight() -> None:
    assert normal_form_monomials(1, -1, 3) == [(0, 1, 0, 0), (0, 2, 1, 0)]
    assert normal_form_monomials(3, 1, 3) == [(2, 1, 0, 0)]
    assert normal_form_monomials(2, 1, 9) == []
    for a, b, c, d in normal_form_monomials(-3, 1, 8):
        assert a * d == 0
        assert (a - d, b - c) == (-1, -2)


def test_assembled_sigma_matches_the_star_form() -> None:
    datum = extended_datum(FormSpec.make("borel:IX", 3, "e1=0"))
    rep = assemble_sigma(datum, seed=1)
    ctx = get_field(3, 2)
    G = enumerate_sl2(ctx)
    star = build_sigma(FormSpec.make("star:IX", 3, "e1=0"))
    assert np.array_equal(evaluate(rep, ctx, G), evaluate(star, ctx, G))
    assert np.array_equal(evaluate(rep, ctx, G), evaluate(datum, ctx, G))


def test_tau_pair_stays_extendable() -> None:
    datum = build_borel_pair(FormSpec.make("borel:I", 5, "e1=0"))
    flipped = tau_pair(datum)
    assert check_borel_pair(flipped).passed
    assert solve_phi_minus(flipped).unique


def test_assembly_is_checked_on_two_fields() -> None:
    assembled = assemble_sigma_checked(extended_datum(FormSpec.make("borel:IX", 3, "e1=0")), seed=1)
    assert assembled.fields == (9, 81)
    assert assembled.note == ""
    assert "F_125 only" in AssembledSigma(assembled.rep, (125,)).note


def test_corrupted_phi_minus_is_not_assembled() -> None:
    datum = extended_datum(FormSpec.make("borel:XXIV", 3, "e2=0,d2=0"))
    rows = [list(row) for row in datum.phi_minus]
    rows[3][0] = rows[3][0] * 2
    broken = datum.with_phi_minus(tuple(tuple(row) for row in rows))
    with pytest.raises(InterpolationFailed):
        assemble_sigma(broken, seed=0)
