from __future__ import annotations

import numpy as np
import pytest

from sl2forms.analyze import (
    check_equivalence,
    classify,
    decompose,
    endomorphism_algebra,
    fitting_idempotent,
    fixed_dims,
    is_indecomposable,
    is_local,
    numeric_signature,
    random_regular,
    rep_images,
    signature,
    unipotent_dims,
)
from sl2forms.catalog import STAR_FIXED_DIMS, FormSpec, build_sigma
from sl2forms.errors import FieldTooSmall
from sl2forms.field import get_field
from sl2forms.linalg import diag, mat_mul, rank
from sl2forms.verify import default_field


def _images(form: str, p: int, params: str = "", m: int | None = None):
    rep = build_sigma(FormSpec.make(form, p, params))
    ctx = get_field(p, m) if m is not None else default_field(rep)
    return rep_images(rep, ctx)


@pytest.mark.parametrize(
    "label,p,params",
    [("I", 5, "e1=0"), ("IX", 3, "e1=0"), ("XI", 2, "e1=0"), ("XIX", 2, "e1=0"), ("XXIV", 3, "e2=0"), ("XXVI", 3, "")],
)
def test_fixed_dims_match_the_star_table(label: str, p: int, params: str) -> None:
    images = _images(f"star:{label}", p, params)
    assert fixed_dims(images) == STAR_FIXED_DIMS[label]
    P = random_regular(images.ctx, 4, np.random.default_rng(5))
    assert fixed_dims(images.conjugate(P)) == STAR_FIXED_DIMS[label]


def test_fixed_dims_need_a_big_enough_torus() -> None:
    with pytest.raises(FieldTooSmall, match="q >= 4"):
        fixed_dims(_images("sharp:XXVI", 3, m=1))


def test_trivial_form_signature() -> None:
    images = _images("sharp:XXVI", 3, m=2)
    sig = numeric_signature(images)
    assert sig.weights == (0, 0, 0, 0)
    assert sig.d_sigma == (4, 4)
    assert sig.d_unipotent == (4, 4)
    assert sig.end_dim == 16
    assert unipotent_dims(images) == (4, 4)


def test_exact_signature_of_a_star_form() -> None:
    sig = signature(FormSpec.make("star:IX", 3, "e1=0"), get_field(3, 2))
    assert sig.weights == (2, 0, 0, -2)
    assert sig.d_sigma == (1, 1)
    with pytest.raises(FieldTooSmall):
        signature(FormSpec.make("star:IX", 3, "e1=1"), get_field(3, 1))


def test_indecomposability() -> None:
    irreducible = _images("sharp:I", 5, "e1=0", m=1)
    assert endomorphism_algebra(irreducible).dim == 1
    assert is_indecomposable(irreducible)
    assert not is_indecomposable(_images("sharp:XV", 3, "e2=1,e3=0", m=2))
    assert not is_local(endomorphism_algebra(_images("sharp:XXVI", 3, m=2)))


def test_fitting_idempotent_projects() -> None:
    ctx = get_field(5)
    E = fitting_idempotent(ctx, diag([1, 0, 2, 0]))
    assert np.array_equal(mat_mul(ctx, E, E), E)
    assert rank(ctx, E) == 2


def test_equivalence_finds_the_conjugator() -> None:
    images = _images("sharp:IX", 3, "e1=0", m=2)
    P = random_regular(images.ctx, 4, np.random.default_rng(11))
    moved = images.conjugate(P)
    found = check_equivalence(images, moved)
    assert found.equivalent and found.exact
    assert np.array_equal(images.conjugate(found.conjugator).generators, moved.generators)
    other = check_equivalence(images, _images("sharp:XXVI", 3, m=2))
    assert not other.equivalent and other.note == "signatures differ"


@pytest.mark.parametrize("form,p,params,m", [("sharp:IX", 3, "e1=0", 2), ("sharp:XV", 3, "e2=1,e3=1", 2), ("sharp:IV", 2, "e1=0,e2=1", 2)])
def test_classify_undoes_a_random_conjugation(form: str, p: int, params: str, m: int) -> None:
    images = _images(form, p, params, m=m)
    P = random_regular(images.ctx, 4, np.random.default_rng(2))
    assert classify(images.conjugate(P), e_max=1) == FormSpec.make(form, p, params)


def test_decompose_trivial_form_into_lines() -> None:
    report = decompose(_images("sharp:XXVI", 3, m=2))
    assert [(str(s), k) for s, k in report.summands] == [("small:1@p=3", 4)]
    assert report.blocks == (1, 1, 1, 1)
    assert not report.indecomposable
    model = report.to_model(9, form="sharp:XXVI")
    assert model.summands[0].multiplicity == 4


def test_decompose_sharp_xv_into_two_natural_blocks() -> None:
    images = _images("sharp:XV", 3, "e2=1,e3=0", m=2)
    report = decompose(images)
    assert sorted((str(s), k) for s, k in report.summands) == [("small:2.1[e=0]@p=3", 1), ("small:2.1[e=1]@p=3", 1)]
    Q = report.conjugator
    assert rank(images.ctx, Q) == 4


def test_decompose_keeps_an_indecomposable_form_whole() -> None:
    spec = FormSpec.make("sharp:I", 5, "e1=0")
    report = decompose(_images("sharp:I", 5, "e1=0", m=1), form=spec)
    assert report.indecomposable
    assert report.summands == [(spec, 1)]
