from __future__ import annotations

import pytest

from sl2forms.catalog import CONJUGATORS, FormSpec
from sl2forms.criteria import (
    CRITERIA,
    SuiteSettings,
    borel_soundness,
    build_jobs,
    conjugator_identity,
    conjugator_sources,
    expected_status,
    extension_dichotomy,
    fixed_space,
    reflect_law,
    sharp_decomposition_row,
    signature_separation,
    small_family_row,
    tau_law,
)


def test_criteria_cards_are_numbered_one_to_eight() -> None:
    assert [card.number for card in CRITERIA] == list(range(1, 9))
    assert all(card.title and card.what_to_check for card in CRITERIA)


def test_jobs_come_in_criterion_order_with_unique_keys() -> None:
    jobs = build_jobs(SuiteSettings(p_set=(2, 3), e_max=0))
    numbers = [job.criterion for job in jobs]
    assert numbers == sorted(numbers)
    assert set(numbers) == set(range(1, 9))
    keys = [(job.criterion, job.key) for job in jobs]
    assert len(keys) == len(set(keys))
    assert (5, "signatures@p=3") in keys


@pytest.mark.parametrize(
    "form,p,params,status",
    [
        ("borel:I", 5, "e1=0", "unique"),
        ("borel:XII", 2, "e1=0,d2=0", "inconsistent"),
        ("borel:V", 2, "e1=0,f=2", "inconsistent"),
        ("borel:V", 2, "e1=0,f=1", "unique"),
        ("borel:XXII", 3, "e1=0,d1=1", "unique"),
        ("borel:XXII", 3, "e1=0,d1=2", "inconsistent"),
    ],
)
def test_expected_extension_status(form: str, p: int, params: str, status: str) -> None:
    assert expected_status(FormSpec.make(form, p, params)) == status


def test_borel_and_extension_jobs() -> None:
    sound = borel_soundness(FormSpec.make("borel:XXII", 3, "e1=0,d1=2"))
    assert sound.passed and sound.backend == "symbolic"
    golden = extension_dichotomy(FormSpec.make("borel:IX", 3, "e1=0"), seed=0)
    assert golden.passed and golden.payload["status"] == "unique"
    assert golden.payload["golden"][1][0] == "2*s"
    refused = extension_dichotomy(FormSpec.make("borel:XII", 2, "e1=0,d2=0"), seed=0)
    assert refused.passed and refused.payload["expected"] == "inconsistent"
    assert refused.backend.startswith("exhaustive(q=")


def test_fixed_space_job() -> None:
    outcome = fixed_space(FormSpec.make("star:XXIV", 3, "e2=0"))
    assert outcome.passed
    assert outcome.payload == {"d": [2, 2], "expected": [2, 2]}


@pytest.mark.parametrize("p", [2, 3])
def test_sharp_signatures_separate_families(p: int) -> None:
    outcome = signature_separation(p)
    assert outcome.passed, outcome.payload
    assert len(outcome.payload["families"]) == 7


def test_decomposition_jobs() -> None:
    assert sharp_decomposition_row(FormSpec.make("sharp:XXIV", 3, "e2=1"), 10**6, 0, 1).passed
    row = small_family_row(FormSpec.make("small:3.2b", 3, "e=1"), 10**6, 0)
    assert row.passed
    assert row.payload["summands"] == [["small:1@p=3", 1], ["small:2.1[e=1]@p=3", 1]]


def test_conjugator_job_and_sources() -> None:
    row = CONJUGATORS["6.1"]
    assert [str(s) for s in conjugator_sources(row, 5, 0)] == ["star:I[e1=0]@p=5"]
    assert conjugator_sources(row, 3, 1) == []
    assert conjugator_sources(CONJUGATORS["5.20a"], 3, 0) == []
    outcome = conjugator_identity(row, FormSpec.make("star:I", 5, "e1=0"), 10**6, 0)
    assert outcome.passed
    assert outcome.payload["target"] == "sharp:I[e1=0]@p=5"


def test_tau_and_reflection_laws_hold() -> None:
    settings = SuiteSettings(p_set=(2, 3), e_max=0)
    tau = tau_law(settings)
    assert tau.passed
    assert tau.payload["anti_homomorphism_failures"] == 0
    reflected = reflect_law(settings)
    assert reflected.passed and reflected.payload["forms"] > 0
