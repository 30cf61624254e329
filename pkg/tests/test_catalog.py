from __future__ import annotations

import pytest

from sl2forms.catalog import (
    CONJUGATORS,
    STAR_FIXED_DIMS,
    FormSpec,
    borel_catalog,
    build_borel_pair,
    build_sigma,
    conjugator_for,
    conjugator_row,
    conjugator_target,
    extension_constraints,
    phi_minus_closed_form,
    sharp_catalog,
    sharp_decomposition,
    small_catalog,
    small_decomposition,
    star_catalog,
)
from sl2forms.errors import BadCharacteristic, BadParams, UnknownForm, UnknownLemma
from sl2forms.linalg import polymat_format

EXTENDABLE = ["I", "II", "IV", "V", "VII", "IX", "XI", "XV", "XIX", "XXI", "XXII", "XXIV", "XXVI"]


def test_form_spec_parsing_and_str() -> None:
    spec = FormSpec.make("borel:IX", 3, "e1=1")
    assert spec.kind == "borel" and spec.label == "IX" and spec.param_map == {"e1": 1}
    assert str(spec) == "borel:IX[e1=1]@p=3"
    assert str(FormSpec.make("sharp:XXVI", 5)) == "sharp:XXVI@p=5"
    assert FormSpec.make("borel:IV", 5, "e2=1,e1=0") == FormSpec.make("borel:IV", 5, {"e1": 0, "e2": 1})


@pytest.mark.parametrize(
    "form,p,params,error",
    [
        ("borel:XXVII", 5, "", UnknownForm),
        ("borel", 5, "", UnknownForm),
        ("weird:I", 5, "", UnknownForm),
        ("borel:I", 4, "e1=0", BadCharacteristic),
        ("borel:I", 37, "e1=0", BadCharacteristic),
        ("borel:I", 5, "e1=-1", BadParams),
        ("borel:I", 5, "e1=9", BadParams),
        ("borel:I", 5, "x=1", BadParams),
        ("borel:I", 5, "e1", BadParams),
    ],
)
def test_form_spec_rejects_bad_input(form: str, p: int, params: str, error: type[Exception]) -> None:
    with pytest.raises(error):
        FormSpec.make(form, p, params)


def test_borel_form_i_at_p5() -> None:
    datum = build_borel_pair(FormSpec.make("borel:I", 5, "e1=0"))
    assert datum.weights == (3, 1, -1, -3)
    rows = polymat_format(datum.phi_plus)
    assert rows[0] == ["1", "t", "3*t^2", "t^3"]
    assert rows[1][2] == "t"
    assert rows[3] == ["0", "0", "0", "1"]


def test_borel_weights_scale_with_frobenius() -> None:
    datum = build_borel_pair(FormSpec.make("borel:I", 5, "e1=1"))
    assert datum.weights == (15, 5, -5, -15)
    assert polymat_format(datum.phi_plus)[0][1] == "t^5"


@pytest.mark.parametrize(
    "form,p,params",
    [
        ("borel:I", 3, "e1=0"),
        ("borel:II", 5, "e1=0"),
        ("borel:V", 3, "e1=1,f=1"),
        ("borel:IV", 5, "e1=1,e2=1"),
    ],
)
def test_borel_admissibility(form: str, p: int, params: str) -> None:
    with pytest.raises((BadParams, BadCharacteristic)):
        build_borel_pair(FormSpec.make(form, p, params))


def test_missing_and_extra_params() -> None:
    with pytest.raises(BadParams, match="missing"):
        build_borel_pair(FormSpec.make("borel:IV", 5, "e1=0"))
    with pytest.raises(BadParams, match="does not take"):
        build_borel_pair(FormSpec.make("borel:I", 5, "e1=0,e2=1"))


def test_monomial_constraint_on_the_whole_borel_catalog() -> None:
    for p in (2, 3, 5):
        for spec in borel_catalog(p, 1):
            datum = build_borel_pair(spec)
            w = datum.weights
            for i, row in enumerate(datum.phi_plus):
                for j, f in enumerate(row):
                    if i == j or f.is_zero():
                        continue
                    assert len(f.terms) == 1, (str(spec), i, j)
                    ((k,),) = f.terms
                    assert 2 * k == w[i] - w[j], (str(spec), i, j)


def test_borel_catalog_contents() -> None:
    p5 = {spec.label for spec in borel_catalog(5, 0)}
    assert "I" in p5 and "II" not in p5 and "XXI" not in p5
    p2 = {spec.label for spec in borel_catalog(2, 1)}
    assert {"V", "XI", "XIX", "XXI"} <= p2
    assert all(spec.kind == "borel" for spec in borel_catalog(3, 1))


def test_phi_minus_closed_forms() -> None:
    i5 = polymat_format(phi_minus_closed_form(FormSpec.make("borel:I", 5, "e1=0")))
    assert [i5[1][0], i5[2][0], i5[2][1], i5[3][0], i5[3][1], i5[3][2]] == ["3*s", "s^2", "4*s", "s^3", "s^2", "3*s"]
    xxiv = polymat_format(phi_minus_closed_form(FormSpec.make("borel:XXIV", 3, "e2=0,d2=0")))
    assert xxiv == [["1", "0", "0", "0"], ["0", "1", "0", "0"], ["0", "0", "1", "0"], ["s", "0", "0", "1"]]


def test_extension_constraints_reject_non_extendable_forms() -> None:
    with pytest.raises(BadParams, match="admits no extension"):
        extension_constraints(FormSpec.make("borel:XII", 2, "e1=0,d2=0"))
    with pytest.raises(BadParams, match="d2 = 0"):
        extension_constraints(FormSpec.make("borel:XXIV", 3, "e2=0,d2=1"))


def test_star_sigma_ix_at_p3() -> None:
    rep = build_sigma(FormSpec.make("star:IX", 3, "e1=0"))
    assert polymat_format(rep.expand())[1][1] == "2*b*c + 1"


def test_star_catalog_covers_extendable_forms() -> None:
    labels = {spec.label for p in (2, 3, 5) for spec in star_catalog(p, 1)}
    assert labels == set(EXTENDABLE)
    assert set(STAR_FIXED_DIMS) == set(EXTENDABLE) - {"XXI", "XXII"}


@pytest.mark.parametrize("p,expected", [(2, 7), (3, 7), (5, 6), (7, 6)])
def test_sharp_family_counts(p: int, expected: int) -> None:
    families = {spec.label for spec in sharp_catalog(p, 2)}
    assert len(families) == expected
    assert {"IV", "XV", "XXIV", "XXVI"} <= families


def test_sharp_decomposition_table() -> None:
    parts = sharp_decomposition(FormSpec.make("sharp:XXVI", 3))
    assert [(str(s), k) for s, k in parts] == [("small:1@p=3", 4)]
    xv = sharp_decomposition(FormSpec.make("sharp:XV", 3, "e2=1,e3=0"))
    assert sorted(str(s) for s, _ in xv) == ["small:2.1[e=0]@p=3", "small:2.1[e=1]@p=3"]
    one = FormSpec.make("sharp:I", 5, "e1=0")
    assert sharp_decomposition(one) == [(one, 1)]


def test_small_catalog_and_decompositions() -> None:
    p2 = {spec.label for spec in small_catalog(2, 0)}
    assert {"3.1a", "3.1b", "3.1c", "3.1d"} <= p2 and "3.2a" not in p2
    assert {spec.label for spec in small_catalog(3, 0, dim=3)} == {"3.2a", "3.2b", "3.2c"}
    parts = small_decomposition(FormSpec.make("small:3.2b", 3, "e=1"))
    assert sorted(str(s) for s, _ in parts) == ["small:1@p=3", "small:2.1[e=1]@p=3"]


def test_conjugator_rows_and_targets() -> None:
    assert conjugator_row("Lemma 6.1") is CONJUGATORS["6.1"]
    with pytest.raises(UnknownLemma):
        conjugator_row("9.99")
    assert CONJUGATORS["6.1"].matrix(5).diagonal().tolist() == [1, 1, 2, 1]
    target, twist = conjugator_target(CONJUGATORS["5.2"], FormSpec.make("star:I", 5, "e1=1"))
    assert str(target) == "plus:I@p=5" and twist == 1
    target, twist = conjugator_target(CONJUGATORS["5.21"], FormSpec.make("star:XXII", 3, "e1=1"))
    assert str(target) == "star:XV[e2=1,e3=1]@p=3" and twist == 0


def test_conjugator_for_builds_lemma_matrix() -> None:
    assert conjugator_for("6.1", 5).diagonal().tolist() == [1, 1, 2, 1]
    assert conjugator_for("Lemma 6.1", 5).tolist() == CONJUGATORS["6.1"].matrix(5).tolist()
    with pytest.raises(UnknownLemma):
        conjugator_for("9.9", 5)
