"""Критерии гомоморфности и соотношения между образующими.

Два бэкенда: symbolic (тождество в координатном кольце, точное) и exhaustive
(перебор точек F_q и F_{q^2}, свидетельство настольного масштаба). Отчет
всегда называет бэкенд; провал всегда несет контрпример или разность.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable
from functools import lru_cache

import numpy as np

from .catalog.contracts import ClosedFormRep, GenDatum
from .errors import CharMismatch, ConfigError, DegreeTooLarge, NotUnimodular
from .field import MAX_M, FieldCtx, enumerate_sl2, get_field, lower, random_sl2, sl2_key, sl2_order, upper, weyl
from .linalg import (
    PolyMat,
    mat_inv,
    mat_mul,
    polymat_eval,
    polymat_format,
    polymat_mul,
    polymat_reduce,
    polymat_sub,
    polymat_substitute,
    polymat_with_vars,
    tau_transpose,
)
from .models import CheckReport
from .symbolic import MPoly, format_poly

DEFAULT_BUDGET = 10**6
MIN_RANDOM_PAIRS = 10_000
CHUNK = 1 << 16

Rep = ClosedFormRep | GenDatum


# --- fields ----------------------------------------------------------------------
def field_for(p: int, *, degree: int = 1, twist: int = 0) -> FieldCtx:
    """Наименьшее F_{p^m} с m > twist, p^m > degree и q >= 4 (или m = 4)."""

    for m in range(1, MAX_M + 1):
        q = p**m
        if m > twist and q > degree and q >= 4:
            return get_field(p, m)
    return get_field(p, MAX_M)


def evidence_fields(ctx: FieldCtx, two_fields: bool = True) -> list[FieldCtx]:
    if two_fields and ctx.m * 2 <= MAX_M:
        return [ctx, ctx.extension(2)]
    return [ctx]


def exhaustive_backend(fields: Iterable[FieldCtx]) -> str:
    return "exhaustive(q=" + ",".join(str(f.q) for f in fields) + ")"


def polymat_degree(mat: PolyMat) -> int:
    return max(f.degree() for row in mat for f in row)


def rep_degree(rep: Rep) -> int:
    if isinstance(rep, ClosedFormRep):
        return rep.max_degree * rep.p ** max(rep.twists)
    deg = polymat_degree(rep.phi_plus)
    if rep.phi_minus is not None:
        deg = max(deg, polymat_degree(rep.phi_minus))
    return max(deg, max(abs(w) for w in rep.weights))


def default_field(rep: Rep) -> FieldCtx:
    twist = max(rep.twists) if isinstance(rep, ClosedFormRep) else 0
    return field_for(rep.p, degree=rep_degree(rep), twist=twist)


def _first_true(mask: np.ndarray) -> int | None:
    hits = np.flatnonzero(mask)
    return int(hits[0]) if hits.size else None


def _diff_entry(diff: PolyMat) -> tuple[list[int], str] | None:
    for i, row in enumerate(diff):
        for j, f in enumerate(row):
            if not f.is_zero():
                return [i + 1, j + 1], format_poly(f)
    return None


# --- G_a homomorphism ------------------------------------------------------------
def _ga_difference(phi: PolyMat) -> PolyMat:
    p = phi[0][0].p
    vars2 = ("t", "tp")
    lifted = polymat_with_vars(phi, vars2)
    t = MPoly.var(p, vars2, "t")
    tp = MPoly.var(p, vars2, "tp")
    shifted = polymat_substitute(lifted, {"t": t + tp})
    other = polymat_substitute(lifted, {"t": tp, "tp": t})
    # other(t, tp) = phi(tp)
    return polymat_sub(shifted, polymat_mul(lifted, other))


def _ga_scan(phi: PolyMat, ctx: FieldCtx) -> dict | None:
    el = ctx.elements()
    table = polymat_eval(ctx, phi, {"t": el})
    for start in range(0, ctx.q, max(1, CHUNK // ctx.q)):
        T = el[start : start + max(1, CHUNK // ctx.q)]
        TT, TP = (g.ravel() for g in np.meshgrid(T, el, indexing="ij"))
        lhs = table[ctx.add(TT, TP)]
        rhs = mat_mul(ctx, table[TT], table[TP])
        k = _first_true((lhs != rhs).any(axis=(-1, -2)))
        if k is not None:
            return {"q": ctx.q, "t": int(TT[k]), "tp": int(TP[k])}
    return None


def check_ga_homomorphism(
    phi: PolyMat, *, mode: str = "auto", ctx: FieldCtx | None = None, two_fields: bool = True
) -> CheckReport:
    """phi(t + t') = phi(t) phi(t')."""

    n = len(phi)
    for i in range(n):
        for j in range(n):
            if phi[i][j].constant_term() != int(i == j):
                raise ValueError("phi(0) must be the identity")
    p = phi[0][0].p
    relation = "ga_additive"
    if mode in ("symbolic", "auto"):
        try:
            diff = polymat_reduce(_ga_difference(phi))
        except DegreeTooLarge:
            if mode == "symbolic":
                raise
        else:
            bad = _diff_entry(diff)
            if bad is None:
                return CheckReport(passed=True, backend="symbolic", checked_relations=[relation])
            ctx = ctx or field_for(p, degree=polymat_degree(phi))
            found = _search(lambda f: _ga_scan(phi, f), ctx)
            return CheckReport(
                passed=False,
                backend="symbolic",
                checked_relations=[relation],
                failed_relation=relation,
                difference=f"entry {bad[0]}: {bad[1]}",
                counterexample=found,
            )
    ctx = ctx or field_for(p, degree=polymat_degree(phi))
    fields = evidence_fields(ctx, two_fields)
    for f in fields:
        found = _ga_scan(phi, f)
        if found is not None:
            return CheckReport(
                passed=False, backend=exhaustive_backend([f]), checked_relations=[relation],
                failed_relation=relation, counterexample=found, fields=[f.q],
            )  # fmt: skip
    return CheckReport(passed=True, backend=exhaustive_backend(fields), checked_relations=[relation], fields=[f.q for f in fields])


def _search(scan: Callable[[FieldCtx], dict | None], ctx: FieldCtx) -> dict | None:
    """Контрпример в ctx и его расширениях, пока m <= 4."""

    m = ctx.m
    while m <= MAX_M:
        found = scan(get_field(ctx.p, m))
        if found is not None:
            return found
        m *= 2
    return None


# --- Borel pair ----------------------------------------------------------------------
def _conjugation_difference(datum: GenDatum) -> PolyMat:
    """u^{max(D,0)} a_ij(t) - u^{max(-D,0)} a_ij(u^2 t), D = d_i - d_j."""

    p = datum.p
    vars2 = ("t", "u")
    lifted = polymat_with_vars(datum.phi_plus, vars2)
    u = MPoly.var(p, vars2, "u")
    t = MPoly.var(p, vars2, "t")
    scaled = polymat_substitute(lifted, {"t": u * u * t})
    rows = []
    for i, row in enumerate(lifted):
        out = []
        for j, a in enumerate(row):
            gap = datum.weights[i] - datum.weights[j]
            left = a * u ** max(gap, 0)
            right = scaled[i][j] * u ** max(-gap, 0)
            out.append(left - right)
        rows.append(tuple(out))
    return tuple(rows)


def _conjugation_scan(datum: GenDatum, ctx: FieldCtx) -> dict | None:
    el = ctx.elements()
    table = polymat_eval(ctx, datum.phi_plus, {"t": el})
    w = np.asarray(datum.weights)
    gaps = w[:, None] - w[None, :]
    for u in ctx.nonzero():
        scale = np.zeros(gaps.shape, dtype=np.int64)
        for gap in np.unique(gaps):
            scale[gaps == gap] = int(ctx.pow(int(u), int(gap)))
        lhs = ctx.mul(table, scale[None, :, :])
        rhs = table[ctx.mul(ctx.mul(int(u), int(u)), el)]
        bad = (lhs != rhs).any(axis=(-1, -2))
        k = _first_true(bad)
        if k is not None:
            return {"q": ctx.q, "t": int(el[k]), "u": int(u)}
    return None


def check_borel_pair(
    datum: GenDatum, *, mode: str = "auto", ctx: FieldCtx | None = None, two_fields: bool = True
) -> CheckReport:
    """Условия (1) phi гомоморфизм, (2) omega гомоморфизм, (3) omega(u) phi(t) omega(u)^-1 = phi(u^2 t)."""

    relations = ["ga_additive", "torus_weights_sum_zero", "torus_conjugation"]
    first = check_ga_homomorphism(datum.phi_plus, mode=mode, ctx=ctx, two_fields=two_fields)
    if not first.passed:
        return first.model_copy(update={"checked_relations": relations[:1]})
    if sum(datum.weights) != 0:
        return CheckReport(
            passed=False, backend="symbolic", checked_relations=relations[:2], failed_relation=relations[1],
            difference=f"sum of weights = {sum(datum.weights)}",
        )  # fmt: skip

    backends = [first.backend]
    fields = list(first.fields)
    relation = relations[2]
    done = False
    if mode in ("symbolic", "auto"):
        try:
            diff = polymat_reduce(_conjugation_difference(datum))
        except DegreeTooLarge:
            if mode == "symbolic":
                raise
        else:
            done = True
            bad = _diff_entry(diff)
            if bad is not None:
                base = ctx or field_for(datum.p, degree=polymat_degree(datum.phi_plus))
                return CheckReport(
                    passed=False, backend="symbolic", checked_relations=relations, failed_relation=relation,
                    difference=f"entry {bad[0]}: {bad[1]}",
                    counterexample=_search(lambda f: _conjugation_scan(datum, f), base),
                )  # fmt: skip
            backends.append("symbolic")
    if not done:
        base = ctx or field_for(datum.p, degree=polymat_degree(datum.phi_plus))
        scan_fields = evidence_fields(base, two_fields)
        for f in scan_fields:
            found = _conjugation_scan(datum, f)
            if found is not None:
                return CheckReport(
                    passed=False, backend=exhaustive_backend([f]), checked_relations=relations,
                    failed_relation=relation, counterexample=found, fields=[f.q],
                )  # fmt: skip
        backends.append(exhaustive_backend(scan_fields))
        fields.extend(f.q for f in scan_fields)
    backend = backends[0] if len(set(backends)) == 1 else "+".join(dict.fromkeys(backends))
    return CheckReport(passed=True, backend=backend, checked_relations=relations, fields=sorted(set(fields)))


# --- opposite relation ------------------------------------------------------------
def _opposite_scan(datum: GenDatum, ctx: FieldCtx, budget: int, seed: int) -> tuple[dict | None, bool]:
    assert datum.phi_minus is not None
    el = ctx.elements()
    plus = polymat_eval(ctx, datum.phi_plus, {"t": el})
    minus = polymat_eval(ctx, datum.phi_minus, {"s": el})
    sampled = ctx.q * ctx.q > budget
    if sampled:
        rng = np.random.default_rng(seed)
        T_all = rng.integers(0, ctx.q, size=budget)
        S_all = rng.integers(0, ctx.q, size=budget)
    else:
        T_all, S_all = (g.ravel() for g in np.meshgrid(el, el, indexing="ij"))
    for start in range(0, T_all.size, CHUNK):
        T = T_all[start : start + CHUNK]
        S = S_all[start : start + CHUNK]
        r = ctx.add(1, ctx.mul(T, S))
        keep = r != 0
        T, S, r = T[keep], S[keep], r[keep]
        if T.size == 0:
            continue
        r_inv = ctx.inv(r)
        lhs = mat_mul(ctx, plus[T], minus[S])
        omega = np.stack([ctx.pow(r, int(w)) for w in datum.weights], axis=-1)
        left = ctx.mul(minus[ctx.mul(S, r_inv)], omega[:, None, :])
        rhs = mat_mul(ctx, left, plus[ctx.mul(T, r_inv)])
        k = _first_true((lhs != rhs).any(axis=(-1, -2)))
        if k is not None:
            return {"q": ctx.q, "t": int(T[k]), "s": int(S[k])}, sampled
    return None, sampled


def check_opposite_relation(
    datum: GenDatum,
    *,
    ctx: FieldCtx | None = None,
    budget: int = DEFAULT_BUDGET,
    seed: int = 0,
    two_fields: bool = True,
) -> CheckReport:
    """phi(t) phi-(s) = phi-(s/(1+ts)) omega(1+ts) phi(t/(1+ts)) при 1 + ts != 0."""

    if datum.phi_minus is None:
        raise ValueError("check_opposite_relation needs phi_minus")
    relation = "opposite_unipotent"
    base = ctx or default_field(datum)
    fields = evidence_fields(base, two_fields)
    sampled_any = False
    for f in fields:
        found, sampled = _opposite_scan(datum, f, budget, seed)
        sampled_any = sampled_any or sampled
        if found is not None:
            return CheckReport(
                passed=False, backend=exhaustive_backend([f]), checked_relations=[relation],
                failed_relation=relation, counterexample=found, fields=[f.q],
            )  # fmt: skip
    note = "rational-argument relation: no symbolic backend"
    if sampled_any:
        note += f"; {budget} seeded pairs per field above budget"
    return CheckReport(
        passed=True, backend=exhaustive_backend(fields), checked_relations=[relation],
        fields=[f.q for f in fields], note=note,
    )  # fmt: skip


# --- evaluation ------------------------------------------------------------------
def _triple(datum: GenDatum, ctx: FieldCtx, a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """phi-(c/a) omega(a) phi+(b/a) для пакета a != 0."""

    assert datum.phi_minus is not None
    inv_a = ctx.inv(a)
    plus = polymat_eval(ctx, datum.phi_plus, {"t": ctx.mul(b, inv_a)})
    minus = polymat_eval(ctx, datum.phi_minus, {"s": ctx.mul(c, inv_a)})
    omega = np.stack([ctx.pow(a, int(w)) for w in datum.weights], axis=-1)
    return mat_mul(ctx, ctx.mul(minus, omega[..., None, :]), plus)


def sigma_of_weyl(datum: GenDatum, ctx: FieldCtx) -> np.ndarray:
    """sigma(w) = phi-(1) phi+(-1) phi-(1)."""

    assert datum.phi_minus is not None
    one = np.array([1])
    minus = polymat_eval(ctx, datum.phi_minus, {"s": one})[0]
    plus = polymat_eval(ctx, datum.phi_plus, {"t": ctx.neg(one)})[0]
    return mat_mul(ctx, mat_mul(ctx, minus, plus), minus)


def evaluate(rep: Rep, ctx: FieldCtx, M: np.ndarray) -> np.ndarray:
    """sigma(M) для одной матрицы (2, 2) или пакета (..., 2, 2)."""

    if rep.p != ctx.p:
        raise CharMismatch(f"representation lives in characteristic {rep.p}, field in {ctx.p}")
    M = np.asarray(M, dtype=np.int64)
    batch = M.shape[:-2]
    flat = M.reshape(-1, 2, 2)
    a, b, c, d = flat[:, 0, 0], flat[:, 0, 1], flat[:, 1, 0], flat[:, 1, 1]
    det = ctx.sub(ctx.mul(a, d), ctx.mul(b, c))
    if np.any(det != 1):
        raise NotUnimodular(f"matrix with determinant {int(det[det != 1][0])} is not in SL(2, F_{ctx.q})")

    if isinstance(rep, ClosedFormRep):
        arrays: dict[str, np.ndarray] = {}
        for block, e in zip(rep.block_names, rep.twists):
            for name, x in zip(block, (a, b, c, d)):
                arrays[name] = ctx.frob(x, e)
        out = polymat_eval(ctx, rep.entries, arrays)
    else:
        if rep.phi_minus is None:
            raise ValueError("evaluating a GenDatum on SL(2) needs phi_minus")
        n = rep.n
        out = np.zeros((flat.shape[0], n, n), dtype=np.int64)
        main = a != 0
        if main.any():
            out[main] = _triple(rep, ctx, a[main], b[main], c[main])
        if (~main).any():
            # w^{-1} M = (c, d; -a, -b), здесь a = 0 и c != 0
            rest = _triple(rep, ctx, c[~main], d[~main], ctx.neg(a[~main]))
            out[~main] = mat_mul(ctx, sigma_of_weyl(rep, ctx)[None], rest)
    return out.reshape(batch + out.shape[-2:])


# --- SL2 homomorphism --------------------------------------------------------------
def _double_ring(rep: ClosedFormRep) -> tuple[PolyMat, PolyMat, PolyMat]:
    """sigma(M1 M2), sigma(M1), sigma(M2) на произведении SL2^k в удвоенном кольце."""

    blocks = rep.block_names
    new_vars: list[str] = []
    copies: list[tuple[tuple[str, ...], tuple[str, ...]]] = []
    for k in range(len(blocks)):
        first = tuple(f"{x}{2 * k + 1}" for x in "abcd")
        second = tuple(f"{x}{2 * k + 2}" for x in "abcd")
        new_vars.extend(first + second)
        copies.append((first, second))
    p = rep.p

    def v(name: str) -> MPoly:
        return MPoly.var(p, new_vars, name)

    to_first: dict[str, MPoly] = {}
    to_second: dict[str, MPoly] = {}
    to_product: dict[str, MPoly] = {}
    for block, (first, second) in zip(blocks, copies):
        a1, b1, c1, d1 = (v(x) for x in first)
        a2, b2, c2, d2 = (v(x) for x in second)
        product = (a1 * a2 + b1 * c2, a1 * b2 + b1 * d2, c1 * a2 + d1 * c2, c1 * b2 + d1 * d2)
        for name, x1, x2, xp in zip(block, (a1, b1, c1, d1), (a2, b2, c2, d2), product):
            to_first[name], to_second[name], to_product[name] = x1, x2, xp
    entries = rep.entries
    return (
        polymat_substitute(entries, to_product),
        polymat_substitute(entries, to_first),
        polymat_substitute(entries, to_second),
    )


def sl2_difference(rep: ClosedFormRep) -> PolyMat:
    prod, first, second = _double_ring(rep)
    return polymat_reduce(polymat_sub(prod, polymat_mul(first, second)))


def _sl2_scan(rep: Rep, ctx: FieldCtx, budget: int, seed: int, samples: int) -> tuple[dict | None, bool]:
    order = sl2_order(ctx.q)
    if order * order <= budget:
        G = enumerate_sl2(ctx, budget=max(budget, ctx.q**3))
        table = evaluate(rep, ctx, G)
        keys = sl2_key(ctx, G)
        step = max(1, CHUNK // order)
        for start in range(0, order, step):
            idx_i = np.arange(start, min(order, start + step))
            I, J = (g.ravel() for g in np.meshgrid(idx_i, np.arange(order), indexing="ij"))
            P = mat_mul(ctx, G[I], G[J])
            lhs = table[np.searchsorted(keys, sl2_key(ctx, P))]
            rhs = mat_mul(ctx, table[I], table[J])
            k = _first_true((lhs != rhs).any(axis=(-1, -2)))
            if k is not None:
                return {"q": ctx.q, "M1": G[I[k]].tolist(), "M2": G[J[k]].tolist()}, False
        return None, False
    rng = np.random.default_rng(seed)
    M1 = random_sl2(ctx, rng, samples)
    M2 = random_sl2(ctx, rng, samples)
    lhs = evaluate(rep, ctx, mat_mul(ctx, M1, M2))
    rhs = mat_mul(ctx, evaluate(rep, ctx, M1), evaluate(rep, ctx, M2))
    k = _first_true((lhs != rhs).any(axis=(-1, -2)))
    if k is not None:
        return {"q": ctx.q, "M1": M1[k].tolist(), "M2": M2[k].tolist()}, True
    return None, True


def _sl2_exhaustive(
    rep: Rep, ctx: FieldCtx | None, budget: int, seed: int, samples: int, two_fields: bool
) -> CheckReport:
    relation = "sl2_multiplicative"
    base = ctx or default_field(rep)
    fields = evidence_fields(base, two_fields)
    sampled_any = False
    for f in fields:
        found, sampled = _sl2_scan(rep, f, budget, seed, samples)
        sampled_any = sampled_any or sampled
        if found is not None:
            return CheckReport(
                passed=False, backend=exhaustive_backend([f]), checked_relations=[relation],
                failed_relation=relation, counterexample=found, fields=[f.q],
            )  # fmt: skip
    note = f"{samples} seeded random pairs where all pairs exceed the budget" if sampled_any else ""
    return CheckReport(
        passed=True, backend=exhaustive_backend(fields), checked_relations=[relation],
        fields=[f.q for f in fields], note=note,
    )  # fmt: skip


def check_sl2_homomorphism(
    rep: Rep,
    *,
    mode: str = "auto",
    ctx: FieldCtx | None = None,
    budget: int = DEFAULT_BUDGET,
    seed: int = 0,
    samples: int = MIN_RANDOM_PAIRS,
    two_fields: bool = True,
) -> CheckReport:
    """sigma(M1 M2) = sigma(M1) sigma(M2).

    symbolic: тождество в удвоенном координатном кольце, только без твистов.
    auto: символьная проверка нескрученной формы плюс мультипликативность F^e.
    """

    relation = "sl2_multiplicative"
    if isinstance(rep, GenDatum):
        if mode == "symbolic":
            raise ConfigError("symbolic mode needs a closed form; a generator datum is checked exhaustively")
        return _sl2_exhaustive(rep, ctx, budget, seed, samples, two_fields)

    twisted = any(rep.twists)
    if mode == "symbolic" and twisted:
        raise DegreeTooLarge(f"symbolic check needs untwisted forms, got twists {rep.twists}; use auto or exhaustive")
    if mode in ("symbolic", "auto"):
        try:
            diff = sl2_difference(rep)
        except DegreeTooLarge:
            if mode == "symbolic":
                raise
        else:
            bad = _diff_entry(diff)
            if bad is not None:
                base = ctx or default_field(rep)
                found = _search(lambda f: _sl2_scan(rep, f, budget, seed, samples)[0], base)
                return CheckReport(
                    passed=False, backend="symbolic", checked_relations=[relation], failed_relation=relation,
                    difference=f"entry {bad[0]}: {bad[1]}", counterexample=found,
                )  # fmt: skip
            if not twisted:
                return CheckReport(passed=True, backend="symbolic", checked_relations=[relation])
            frob = check_frobenius_multiplicative(rep.p, max(rep.twists))
            return CheckReport(
                passed=frob.passed,
                backend="symbolic",
                checked_relations=[relation, "frobenius_multiplicative"],
                failed_relation=None if frob.passed else "frobenius_multiplicative",
                counterexample=frob.counterexample,
                fields=frob.fields,
                note=f"untwisted form checked in the coordinate ring; twists {list(rep.twists)} factor through Frobenius",
            )
    return _sl2_exhaustive(rep, ctx, budget, seed, samples, two_fields)


# --- Frobenius, Weyl element, factorization ----------------------------------------
@lru_cache(maxsize=32)
def check_frobenius_multiplicative(p: int, e: int, budget: int = DEFAULT_BUDGET, seed: int = 0) -> CheckReport:
    """Поэлементное возведение в степень p^e мультипликативно на SL(2, F_q), m > e."""

    ctx = field_for(p, twist=e)
    relation = "frobenius_multiplicative"
    order = sl2_order(ctx.q)
    if order * order <= budget:
        G = enumerate_sl2(ctx, budget=max(budget, ctx.q**3))
        I, J = (g.ravel() for g in np.meshgrid(np.arange(order), np.arange(order), indexing="ij"))
        M1, M2 = G[I], G[J]
        note = ""
    else:
        rng = np.random.default_rng(seed)
        M1 = random_sl2(ctx, rng, MIN_RANDOM_PAIRS)
        M2 = random_sl2(ctx, rng, MIN_RANDOM_PAIRS)
        note = f"{MIN_RANDOM_PAIRS} seeded random pairs"
    lhs = ctx.frob(mat_mul(ctx, M1, M2), e)
    rhs = mat_mul(ctx, ctx.frob(M1, e), ctx.frob(M2, e))
    k = _first_true((lhs != rhs).any(axis=(-1, -2)))
    if k is not None:
        return CheckReport(
            passed=False, backend=exhaustive_backend([ctx]), checked_relations=[relation], failed_relation=relation,
            counterexample={"q": ctx.q, "M1": M1[k].tolist(), "M2": M2[k].tolist()}, fields=[ctx.q],
        )  # fmt: skip
    return CheckReport(passed=True, backend=exhaustive_backend([ctx]), checked_relations=[relation], fields=[ctx.q], note=note)


def check_weyl_element(ctx: FieldCtx) -> bool:
    """w = u-(1) u+(-1) u-(1) = (0, -1; 1, 0)."""

    product = mat_mul(ctx, mat_mul(ctx, lower(ctx, 1), upper(ctx, ctx.neg(1))), lower(ctx, 1))
    return bool(np.array_equal(product, weyl(ctx)))


def check_factorization_identity(ctx: FieldCtx) -> CheckReport:
    """(1 t; 0 1)(1 0; s 1) = (1 0; s/r 1) diag(r, 1/r) (1 t/r; 0 1), r = 1 + ts != 0."""

    relation = "opposite_factorization_2x2"
    el = ctx.elements()
    T, S = (g.ravel() for g in np.meshgrid(el, el, indexing="ij"))
    r = ctx.add(1, ctx.mul(T, S))
    keep = r != 0
    T, S, r = T[keep], S[keep], r[keep]
    r_inv = ctx.inv(r)
    lhs = mat_mul(ctx, upper(ctx, T), lower(ctx, S))
    D = np.zeros(r.shape + (2, 2), dtype=np.int64)
    D[:, 0, 0] = r
    D[:, 1, 1] = r_inv
    rhs = mat_mul(ctx, mat_mul(ctx, lower(ctx, ctx.mul(S, r_inv)), D), upper(ctx, ctx.mul(T, r_inv)))
    k = _first_true((lhs != rhs).any(axis=(-1, -2)))
    if k is not None:
        return CheckReport(
            passed=False, backend=exhaustive_backend([ctx]), checked_relations=[relation], failed_relation=relation,
            counterexample={"q": ctx.q, "t": int(T[k]), "s": int(S[k])}, fields=[ctx.q],
        )  # fmt: skip
    return CheckReport(passed=True, backend=exhaustive_backend([ctx]), checked_relations=[relation], fields=[ctx.q])


def check_conjugation_identity(
    source: Rep,
    target: Rep,
    P: np.ndarray,
    *,
    twist: int = 0,
    ctx: FieldCtx | None = None,
    budget: int = DEFAULT_BUDGET,
    seed: int = 0,
    samples: int = MIN_RANDOM_PAIRS,
    two_fields: bool = True,
) -> CheckReport:
    """P^{-1} source(M) P = target(F^twist(M)) на SL(2, F_q)."""

    relation = "conjugator_identity"
    if ctx is None:
        twists = [0]
        for rep in (source, target):
            if isinstance(rep, ClosedFormRep):
                twists.append(max(rep.twists) + (twist if rep is target else 0))
        degree = max(rep_degree(source), rep_degree(target) * source.p**twist)
        ctx = field_for(source.p, degree=degree, twist=max(twists))
    fields = evidence_fields(ctx, two_fields)
    sampled_any = False
    for f in fields:
        if f.q**3 <= budget:
            G = enumerate_sl2(f, budget=budget)
        else:
            G = random_sl2(f, np.random.default_rng(seed), samples)
            sampled_any = True
        Pf = np.asarray(P, dtype=np.int64) % f.p
        P_inv = mat_inv(f, Pf)
        for start in range(0, G.shape[0], CHUNK):
            M = G[start : start + CHUNK]
            lhs = mat_mul(f, mat_mul(f, P_inv[None], evaluate(source, f, M)), Pf[None])
            rhs = evaluate(target, f, f.frob(M, twist))
            k = _first_true((lhs != rhs).any(axis=(-1, -2)))
            if k is not None:
                return CheckReport(
                    passed=False, backend=exhaustive_backend([f]), checked_relations=[relation],
                    failed_relation=relation, counterexample={"q": f.q, "M": M[k].tolist()}, fields=[f.q],
                )  # fmt: skip
    note = f"{samples} seeded elements per field above the budget" if sampled_any else ""
    return CheckReport(
        passed=True, backend=exhaustive_backend(fields), checked_relations=[relation],
        fields=[f.q for f in fields], note=note,
    )  # fmt: skip


# --- involutions and transports ----------------------------------------------------
def omega_star(weights: tuple[int, ...]) -> tuple[int, ...]:
    """omega*(u) = tau(omega(u)^{-1}): веса (-d_n, ..., -d_1)."""

    n = len(weights)
    return tuple(-weights[n - 1 - i] for i in range(n))


def psi_star(datum: GenDatum) -> GenDatum:
    """psi*(A) = tau(psi(A^{-1})) на борелевской паре: (tau(phi) o inv, omega*)."""

    p = datum.p
    t = MPoly.var(p, ("t",), "t")
    flipped = polymat_substitute(datum.phi_plus, {"t": -t})
    return GenDatum(p=p, phi_plus=tau_transpose(flipped), weights=omega_star(datum.weights), label=datum.label)  # type: ignore[arg-type]


def _block_substitution(rep: ClosedFormRep, images: Callable[[MPoly, MPoly, MPoly, MPoly], tuple[MPoly, ...]]) -> PolyMat:
    mapping: dict[str, MPoly] = {}
    for block in rep.block_names:
        a, b, c, d = (MPoly.var(rep.p, rep.vars, x) for x in block)
        for name, image in zip(block, images(a, b, c, d)):
            mapping[name] = image
    return polymat_reduce(polymat_substitute(rep.entries, mapping))


def tau_sigma_tau(rep: ClosedFormRep) -> ClosedFormRep:
    """(tau sigma tau)(A) = tau(sigma(tau A)); tau(a, b; c, d) = (d, b; c, a)."""

    entries = _block_substitution(rep, lambda a, b, c, d: (d, b, c, a))
    return ClosedFormRep(p=rep.p, entries=tau_transpose(entries), twists=rep.twists, label=rep.label)  # type: ignore[arg-type]


def sigma_star(rep: ClosedFormRep) -> ClosedFormRep:
    """sigma*(A) = tau(sigma(A^{-1})); A^{-1} = (d, -b; -c, a)."""

    entries = _block_substitution(rep, lambda a, b, c, d: (d, -b, -c, a))
    return ClosedFormRep(p=rep.p, entries=tau_transpose(entries), twists=rep.twists, label=rep.label)  # type: ignore[arg-type]


def reflect(rep: ClosedFormRep) -> ClosedFormRep:
    """Автоморфизм r: (a, b; c, d) -> (a, -b; -c, d)."""

    entries = _block_substitution(rep, lambda a, b, c, d: (a, -b, -c, d))
    return ClosedFormRep(p=rep.p, entries=entries, twists=rep.twists, label=rep.label)


def antisymmetric_weights(phi: PolyMat, bound: int) -> list[tuple[int, ...]]:
    """Все omega из Omega(n) с |d_i| <= bound, для которых psi_{phi, omega} гомоморфизм."""

    n = len(phi)
    half = n // 2
    out: list[tuple[int, ...]] = []

    def candidates(prefix: list[int]) -> Iterable[list[int]]:
        if len(prefix) == half:
            yield prefix
            return
        top = prefix[-1] if prefix else bound
        for value in range(top, -1, -1):
            yield from candidates(prefix + [value])

    for head in candidates([]):
        middle = [0] if n % 2 else []
        weights = tuple(head + middle + [-x for x in reversed(head)])
        ok = True
        for i in range(n):
            for j in range(n):
                f = phi[i][j]
                if i == j or f.is_zero():
                    continue
                gap = weights[i] - weights[j]
                if any(2 * exps[0] != gap for exps in f.terms):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(weights)
    return out


def format_matrix(mat: PolyMat) -> list[list[str]]:
    return polymat_format(mat)
