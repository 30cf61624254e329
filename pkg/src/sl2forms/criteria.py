"""Приемочный набор suite: восемь критериев как списки независимых заданий.

Роль модуля:
- задает карточки критериев и порядок заданий (он же порядок отчета);
- каждое задание является чистой функцией без SQL и файлов, возвращает JobOutcome;
- свидетельство всегда помечено бэкендом: symbolic или exhaustive(q=...).
"""

from __future__ import annotations

import zlib
from collections import Counter
from collections.abc import Callable, Iterable
from dataclasses import dataclass, field
from functools import lru_cache, partial
from typing import Any

import numpy as np

from .analyze import classify, decompose, fixed_dims, is_indecomposable, random_regular, rep_images, signature
from .catalog import (
    CONJUGATORS,
    SMALL_FAMILIES,
    STAR_FIXED_DIMS,
    ConjugatorRow,
    FormSpec,
    borel_catalog,
    build_borel_pair,
    build_sigma,
    conjugator_for,
    conjugator_target,
    extended_datum,
    extension_constraints,
    phi_minus_closed_form,
    sharp_catalog,
    sharp_decomposition,
    small_catalog,
    small_decomposition,
    star_borel_spec,
    star_catalog,
)
from .errors import BadCharacteristic, BadParams, DegreeTooLarge
from .extend import assemble_sigma, solve_phi_minus
from .field import MAX_M, FieldCtx, get_field, random_sl2
from .linalg import kron_product, mat_mul, polymat_format, tau_transpose
from .verify import (
    check_borel_pair,
    check_conjugation_identity,
    check_factorization_identity,
    check_sl2_homomorphism,
    check_weyl_element,
    default_field,
    evaluate,
    exhaustive_backend,
    field_for,
    omega_star,
    psi_star,
    reflect,
    rep_degree,
    tau_sigma_tau,
)

SEPARATION_E_MAX = 2
ROUND_TRIPS = 10
PROPERTY_INSTANCES = 200
EXPECTED_FAMILY_COUNTS = {2: 7, 3: 7}
DEFAULT_FAMILY_COUNT = 6
COMMON_FAMILIES = ("IV", "XV", "XXIV", "XXVI")


@dataclass(frozen=True)
class CriterionCard:
    """Карточка приемочного критерия."""

    number: int
    title: str
    what_to_check: str


CRITERIA: tuple[CriterionCard, ...] = (
    CriterionCard(1, "Borel catalog soundness", "check_borel_pair passes on every Borel form and admissible p"),
    CriterionCard(2, "Extension dichotomy", "phi- is unique exactly under the forced constraints and equals the golden table"),
    CriterionCard(3, "Assembled sigma* correctness", "interpolated sigma* equals the closed form and is a homomorphism"),
    CriterionCard(4, "Invariant table", "fixed_dims reproduces d(sigma*) for every extendable form"),
    CriterionCard(5, "Classification separation", "SHARP signatures are distinct, family counts hold, classify round-trips"),
    CriterionCard(6, "Decomposition table", "decompose reproduces the SHARP and small-family decompositions"),
    CriterionCard(7, "Conjugator lemmas", "Inn_P o source = target o F^e for every printed conjugator"),
    CriterionCard(8, "Property suites", "involution and tau laws, reflection, monomial constraint, Frobenius and mixed product"),
)


def all_criteria() -> tuple[CriterionCard, ...]:
    return CRITERIA


@dataclass(frozen=True)
class JobOutcome:
    passed: bool
    backend: str
    payload: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class SuiteJob:
    criterion: int
    key: str
    run: Callable[[], JobOutcome]


@dataclass(frozen=True)
class SuiteSettings:
    p_set: tuple[int, ...] = (2, 3, 5)
    e_max: int = 1
    seed: int = 0
    budget: int = 10**6


def _dump(report: Any) -> dict[str, Any]:
    return report.model_dump(by_alias=True, exclude_none=True)


def _fields_backend(qs: Iterable[int]) -> str:
    return "exhaustive(q=" + ",".join(str(q) for q in qs) + ")"


# --- 1. Borel soundness ------------------------------------------------------------------
def borel_soundness(spec: FormSpec) -> JobOutcome:
    report = check_borel_pair(build_borel_pair(spec), mode="auto")
    return JobOutcome(report.passed, report.backend, _dump(report))


# --- 2. extension dichotomy ----------------------------------------------------------------
def expected_status(spec: FormSpec) -> str:
    try:
        extension_constraints(spec)
    except (BadParams, BadCharacteristic):
        return "inconsistent"
    return "unique"


def extension_dichotomy(spec: FormSpec, seed: int) -> JobOutcome:
    expected = expected_status(spec)
    solution = solve_phi_minus(build_borel_pair(spec), seed=seed)
    payload = _dump(solution.to_report(spec))
    payload["expected"] = expected
    passed = solution.status == expected
    if passed and solution.unique:
        assert solution.phi_minus is not None
        golden = polymat_format(phi_minus_closed_form(spec))
        payload["golden"] = golden
        passed = polymat_format(solution.phi_minus) == golden
    return JobOutcome(passed, _fields_backend(solution.fields), payload)


# --- 3. assembled sigma* -------------------------------------------------------------------
def assembled_sigma(spec: FormSpec, budget: int, seed: int) -> JobOutcome:
    closed = build_sigma(spec)
    assembled = assemble_sigma(extended_datum(star_borel_spec(spec)), seed=seed, label=spec.form)
    payload: dict[str, Any] = {}
    try:
        same = polymat_format(assembled.entries) == polymat_format(closed.expand())
        payload["compared"] = "normal form"
    except DegreeTooLarge:
        ctx = default_field(closed)
        M = random_sl2(ctx, np.random.default_rng(seed), 4096)
        same = bool(np.array_equal(evaluate(assembled, ctx, M), evaluate(closed, ctx, M)))
        payload["compared"] = f"values at 4096 seeded points of SL(2, F_{ctx.q})"
    if not same:
        payload["assembled"] = polymat_format(assembled.entries)
        return JobOutcome(False, "symbolic", payload)
    mode = "exhaustive" if any(closed.twists) else "symbolic"
    report = check_sl2_homomorphism(closed, mode=mode, budget=budget, seed=seed)
    payload["homomorphism"] = _dump(report)
    return JobOutcome(report.passed, report.backend, payload)


# --- 4. fixed-space table ------------------------------------------------------------------
def fixed_space(spec: FormSpec) -> JobOutcome:
    rep = build_sigma(spec)
    ctx = default_field(rep)
    got = fixed_dims(rep_images(rep, ctx))
    expected = STAR_FIXED_DIMS[spec.label]
    return JobOutcome(got == expected, exhaustive_backend([ctx]), {"d": list(got), "expected": list(expected)})


# --- 5. classification separation -------------------------------------------------------------
@lru_cache(maxsize=16)
def separation_field(p: int, e_max: int = SEPARATION_E_MAX) -> FieldCtx:
    reps = [build_sigma(spec) for spec in sharp_catalog(p, e_max)]
    degree = max(rep_degree(rep) for rep in reps)
    return field_for(p, degree=degree, twist=e_max)


def signature_separation(p: int) -> JobOutcome:
    specs = sharp_catalog(p, SEPARATION_E_MAX)
    ctx = separation_field(p)
    keys = {str(spec): signature(spec, ctx).key for spec in specs}
    seen = Counter(keys.values())
    clashes = sorted(name for name, key in keys.items() if seen[key] > 1)
    families = sorted({spec.label for spec in specs})
    expected = EXPECTED_FAMILY_COUNTS.get(p, DEFAULT_FAMILY_COUNT)
    common = [label for label in COMMON_FAMILIES if label not in families]
    payload = {"q": ctx.q, "families": families, "expected_families": expected, "clashes": clashes}
    passed = not clashes and len(families) == expected and not common
    return JobOutcome(passed, exhaustive_backend([ctx]), payload)


def classify_round_trip(spec: FormSpec, budget: int, seed: int) -> JobOutcome:
    ctx = separation_field(spec.p)
    images = rep_images(build_sigma(spec), ctx)
    rng = np.random.default_rng([seed, ctx.q, zlib.crc32(str(spec).encode())])
    misses: list[str] = []
    for _ in range(ROUND_TRIPS):
        P = random_regular(ctx, images.n, rng)
        got = classify(images.conjugate(P), e_max=SEPARATION_E_MAX, budget=budget, seed=seed)
        if got != spec:
            misses.append(str(got))
    return JobOutcome(not misses, exhaustive_backend([ctx]), {"q": ctx.q, "trials": ROUND_TRIPS, "misclassified": misses})


# --- 6. decompositions ----------------------------------------------------------------------
def _summand_keys(summands: Iterable[tuple[FormSpec, int]]) -> list[list[Any]]:
    return sorted([str(spec), k] for spec, k in summands)


def sharp_decomposition_row(spec: FormSpec, budget: int, seed: int, e_max: int) -> JobOutcome:
    rep = build_sigma(spec)
    ctx = default_field(rep)
    report = decompose(rep_images(rep, ctx), budget=budget, seed=seed, form=spec, e_max=e_max)
    expected = sharp_decomposition(spec)
    got_keys, expected_keys = _summand_keys(report.summands), _summand_keys(expected)
    indecomposable = expected == [(spec, 1)]
    passed = got_keys == expected_keys and report.indecomposable == indecomposable
    payload = {"q": ctx.q, "summands": got_keys, "expected": expected_keys, "indecomposable": report.indecomposable}
    return JobOutcome(passed, exhaustive_backend([ctx]), payload)


def small_family_row(spec: FormSpec, budget: int, seed: int) -> JobOutcome:
    rep = build_sigma(spec)
    ctx = default_field(rep)
    images = rep_images(rep, ctx)
    expected_indec = SMALL_FAMILIES[spec.label].indecomposable
    indec = is_indecomposable(images, budget=budget, seed=seed)
    payload: dict[str, Any] = {"q": ctx.q, "indecomposable": indec, "expected_indecomposable": expected_indec}
    passed = indec == expected_indec
    if passed and not indec:
        report = decompose(images, budget=budget, seed=seed, form=spec)
        payload["summands"] = _summand_keys(report.summands)
        payload["expected"] = _summand_keys(small_decomposition(spec))
        passed = payload["summands"] == payload["expected"]
    return JobOutcome(passed, exhaustive_backend([ctx]), payload)


# --- 7. conjugators --------------------------------------------------------------------------
def conjugator_sources(row: ConjugatorRow, p: int, e_max: int) -> list[FormSpec]:
    if row.source.startswith("star:"):
        return [spec for spec in star_catalog(p, e_max) if spec.form == row.source]
    spec = FormSpec.make(row.source, p)
    try:
        build_sigma(spec)
    except (BadParams, BadCharacteristic):
        return []
    return [spec]


def conjugator_identity(row: ConjugatorRow, source: FormSpec, budget: int, seed: int) -> JobOutcome:
    target, twist = conjugator_target(row, source)
    P = conjugator_for(row.key, source.p)
    report = check_conjugation_identity(build_sigma(source), build_sigma(target), P, twist=twist, budget=budget, seed=seed)
    payload = _dump(report)
    payload.update({"lemma": row.key, "target": str(target), "twist": twist})
    return JobOutcome(report.passed, report.backend, payload)


# --- 8. property suites -----------------------------------------------------------------------
def _random_field(rng: np.random.Generator, p_set: tuple[int, ...]) -> FieldCtx:
    p = int(rng.choice(p_set))
    return get_field(p, int(rng.integers(1, MAX_M + 1)))


def omega_star_law(seed: int) -> JobOutcome:
    rng = np.random.default_rng(seed)
    bad = []
    for _ in range(PROPERTY_INSTANCES):
        n = int(rng.integers(2, 5))
        head = [int(x) for x in rng.integers(-20, 21, size=n - 1)]
        weights = tuple(head + [-sum(head)])
        if omega_star(omega_star(weights)) != weights:
            bad.append(list(weights))
    return JobOutcome(not bad, "symbolic", {"instances": PROPERTY_INSTANCES, "failures": bad[:5]})


def psi_star_law(settings: SuiteSettings) -> JobOutcome:
    rng = np.random.default_rng(settings.seed)
    pool = [spec for p in settings.p_set for spec in borel_catalog(p, settings.e_max)]
    bad = []
    for _ in range(PROPERTY_INSTANCES):
        spec = pool[int(rng.integers(len(pool)))]
        datum = build_borel_pair(spec)
        twice = psi_star(psi_star(datum))
        if twice.weights != datum.weights or polymat_format(twice.phi_plus) != polymat_format(datum.phi_plus):
            bad.append(str(spec))
    return JobOutcome(not bad, "symbolic", {"instances": PROPERTY_INSTANCES, "failures": bad[:5]})


def tau_law(settings: SuiteSettings) -> JobOutcome:
    """tau(tau A) = A и tau(AB) = tau(B) tau(A)."""

    rng = np.random.default_rng(settings.seed)
    involution = 0
    anti = 0
    for _ in range(PROPERTY_INSTANCES):
        ctx = _random_field(rng, settings.p_set)
        n = int(rng.integers(1, 5))
        A, B = (rng.integers(0, ctx.q, size=(n, n)) for _ in range(2))
        if not np.array_equal(tau_transpose(tau_transpose(A)), A):
            involution += 1
        if not np.array_equal(tau_transpose(mat_mul(ctx, A, B)), mat_mul(ctx, tau_transpose(B), tau_transpose(A))):
            anti += 1
    payload = {"instances": PROPERTY_INSTANCES, "involution_failures": involution, "anti_homomorphism_failures": anti}
    return JobOutcome(involution == 0 and anti == 0, "exhaustive(random)", payload)


def reflect_law(settings: SuiteSettings) -> JobOutcome:
    """r(a, b; c, d) = (a, -b; -c, d) инволюция, и sigma o r снова гомоморфизм."""

    bad = []
    checked = 0
    for p in settings.p_set:
        for spec in sharp_catalog(p, 0):
            rep = build_sigma(spec)
            once = reflect(rep)
            checked += 1
            if polymat_format(reflect(once).entries) != polymat_format(rep.entries):
                bad.append(f"{spec}: not an involution")
            elif not check_sl2_homomorphism(once, mode="auto", budget=settings.budget, seed=settings.seed).passed:
                bad.append(f"{spec}: reflected form is not a homomorphism")
    return JobOutcome(not bad, "symbolic", {"forms": checked, "failures": bad[:10]})


def tau_sigma_tau_law(settings: SuiteSettings) -> JobOutcome:
    rng = np.random.default_rng(settings.seed)
    pool = [
        spec
        for p in settings.p_set
        for spec in sharp_catalog(p, settings.e_max) + small_catalog(p, settings.e_max)
    ]
    bad = []
    for _ in range(PROPERTY_INSTANCES):
        spec = pool[int(rng.integers(len(pool)))]
        rep = build_sigma(spec)
        if polymat_format(tau_sigma_tau(tau_sigma_tau(rep)).entries) != polymat_format(rep.entries):
            bad.append(str(spec))
    return JobOutcome(not bad, "symbolic", {"instances": PROPERTY_INSTANCES, "failures": bad[:5]})


def monomial_constraint(settings: SuiteSettings) -> JobOutcome:
    """Каждый элемент phi*(t) вне диагонали равен 0 или моном t^k с 2k = d_i - d_j."""

    bad = []
    checked = 0
    for p in settings.p_set:
        for spec in borel_catalog(p, settings.e_max):
            datum = build_borel_pair(spec)
            checked += 1
            w = datum.weights
            for i, row in enumerate(datum.phi_plus):
                for j, f in enumerate(row):
                    if i == j or f.is_zero():
                        continue
                    if len(f.terms) != 1 or any(2 * exps[0] != w[i] - w[j] for exps in f.terms):
                        bad.append(f"{spec} entry ({i + 1},{j + 1})")
    return JobOutcome(not bad, "symbolic", {"forms": checked, "failures": bad[:10]})


def frobenius_law(settings: SuiteSettings) -> JobOutcome:
    rng = np.random.default_rng(settings.seed)
    bad = 0
    for _ in range(PROPERTY_INSTANCES):
        ctx = _random_field(rng, settings.p_set)
        e = int(rng.integers(0, ctx.m))
        M1, M2 = random_sl2(ctx, rng, 1)[0], random_sl2(ctx, rng, 1)[0]
        lhs = ctx.frob(mat_mul(ctx, M1, M2), e)
        rhs = mat_mul(ctx, ctx.frob(M1, e), ctx.frob(M2, e))
        if not np.array_equal(lhs, rhs):
            bad += 1
    weyl_ok = all(check_weyl_element(get_field(p)) for p in settings.p_set)
    factorization = [check_factorization_identity(get_field(p)) for p in settings.p_set]
    passed = bad == 0 and weyl_ok and all(r.passed for r in factorization)
    payload = {
        "instances": PROPERTY_INSTANCES,
        "failures": bad,
        "weyl_element": weyl_ok,
        "factorization": [r.passed for r in factorization],
    }
    return JobOutcome(passed, "exhaustive(random)", payload)


def mixed_product_law(settings: SuiteSettings) -> JobOutcome:
    """(A (x) B)(C (x) D) = AC (x) BD."""

    rng = np.random.default_rng(settings.seed)
    bad = 0
    for _ in range(PROPERTY_INSTANCES):
        ctx = _random_field(rng, settings.p_set)
        n, k = (int(x) for x in rng.integers(1, 3, size=2))
        A, C = (rng.integers(0, ctx.q, size=(n, n)) for _ in range(2))
        B, D = (rng.integers(0, ctx.q, size=(k, k)) for _ in range(2))
        lhs = mat_mul(ctx, kron_product(A, B, ctx), kron_product(C, D, ctx))
        rhs = kron_product(mat_mul(ctx, A, C), mat_mul(ctx, B, D), ctx)
        if not np.array_equal(lhs, rhs):
            bad += 1
    return JobOutcome(bad == 0, "exhaustive(random)", {"instances": PROPERTY_INSTANCES, "failures": bad})


# --- job list ------------------------------------------------------------------------------------
def build_jobs(settings: SuiteSettings) -> list[SuiteJob]:
    """Задания в порядке критериев; порядок отчета совпадает с этим списком."""

    s = settings
    jobs: list[SuiteJob] = []
    for p in s.p_set:
        jobs += [SuiteJob(1, str(spec), partial(borel_soundness, spec)) for spec in borel_catalog(p, s.e_max)]
    for p in s.p_set:
        jobs += [SuiteJob(2, str(spec), partial(extension_dichotomy, spec, s.seed)) for spec in borel_catalog(p, s.e_max)]
    for p in s.p_set:
        jobs += [SuiteJob(3, str(spec), partial(assembled_sigma, spec, s.budget, s.seed)) for spec in star_catalog(p, s.e_max)]
    for p in s.p_set:
        jobs += [
            SuiteJob(4, str(spec), partial(fixed_space, spec))
            for spec in star_catalog(p, s.e_max)
            if spec.label in STAR_FIXED_DIMS
        ]
    for p in s.p_set:
        jobs.append(SuiteJob(5, f"signatures@p={p}", partial(signature_separation, p)))
        jobs += [
            SuiteJob(5, f"round-trip {spec}", partial(classify_round_trip, spec, s.budget, s.seed))
            for spec in sharp_catalog(p, SEPARATION_E_MAX)
        ]
    for p in s.p_set:
        jobs += [
            SuiteJob(6, str(spec), partial(sharp_decomposition_row, spec, s.budget, s.seed, s.e_max))
            for spec in sharp_catalog(p, s.e_max)
        ]
        jobs += [SuiteJob(6, str(spec), partial(small_family_row, spec, s.budget, s.seed)) for spec in small_catalog(p, s.e_max)]
    for row in CONJUGATORS.values():
        for p in s.p_set:
            jobs += [
                SuiteJob(7, f"lemma {row.key} {spec}", partial(conjugator_identity, row, spec, s.budget, s.seed))
                for spec in conjugator_sources(row, p, s.e_max)
            ]
    jobs += [
        SuiteJob(8, "omega_star_involution", partial(omega_star_law, s.seed)),
        SuiteJob(8, "psi_star_involution", partial(psi_star_law, s)),
        SuiteJob(8, "tau_transpose_laws", partial(tau_law, s)),
        SuiteJob(8, "reflect_automorphism", partial(reflect_law, s)),
        SuiteJob(8, "tau_sigma_tau_involution", partial(tau_sigma_tau_law, s)),
        SuiteJob(8, "monomial_constraint", partial(monomial_constraint, s)),
        SuiteJob(8, "frobenius_multiplicative", partial(frobenius_law, s)),
        SuiteJob(8, "mixed_product", partial(mixed_product_law, s)),
    ]
    return jobs
