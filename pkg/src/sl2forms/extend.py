"""Продолжение борелевской пары на SL(2): поиск phi- и сборка sigma.

Обе стороны соотношения
    phi(t) phi-(s) = phi-(s/(1+ts)) omega(1+ts) phi(t/(1+ts))
линейны по неизвестным коэффициентам phi-, поэтому phi- ищется решением
линейной системы над F_p по точкам F_q x F_q. Несовместная система дает
сертификат: строку, которая после редукции превращается в 0 = c.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .catalog import FormSpec, build_borel_pair
from .catalog.contracts import SL2_VARS, ClosedFormRep, GenDatum
from .errors import AmbiguousSolution, DegreeBoundTooSmall, InterpolationFailed, ZeroInverse
from .field import MAX_M, FieldCtx, get_field
from .linalg import IncrementalSolver, PolyMat, polymat_eval, polymat_format, polymat_map, tau_transpose
from .models import Certificate, PhiMinusReport
from .symbolic import MPoly, format_poly, rename
from .verify import (
    check_ga_homomorphism,
    check_opposite_relation,
    check_sl2_homomorphism,
    evaluate,
    evidence_fields,
    field_for,
)

logger = logging.getLogger(__name__)

S_VARS = ("s",)
ROW_BUDGET = 1 << 20
FULL_GRID_LIMIT = 50_000
SAMPLE_POINTS = 4096


@dataclass(frozen=True)
class PhiMinusSolution:
    status: str  # unique | inconsistent
    phi_minus: PolyMat | None
    degree_bound: int
    fields: tuple[int, ...]
    certificate: Certificate | None = None
    note: str = ""
    sigma: ClosedFormRep | None = None

    @property
    def unique(self) -> bool:
        return self.status == "unique"

    def to_report(self, spec: FormSpec) -> PhiMinusReport:
        return PhiMinusReport(
            form=spec.form,
            p=spec.p,
            params=spec.param_map,
            status=self.status,  # type: ignore[arg-type]
            phi_minus=polymat_format(self.phi_minus) if self.phi_minus is not None else None,
            certificate=self.certificate,
            degree_bound=self.degree_bound,
            fields=list(self.fields),
            sigma=polymat_format(self.sigma.expand()) if self.sigma is not None else None,
            note=self.note,
        )


# --- unknowns --------------------------------------------------------------------
def _unknowns(n: int, bound: int) -> list[tuple[int, int, int]]:
    """(i, j, k): коэффициент при s^k в b_{i,j}, i > j, 0-based."""

    return [(i, j, k) for i in range(n) for j in range(i) for k in range(1, bound + 1)]


def _unknown_name(u: tuple[int, int, int]) -> str:
    i, j, k = u
    return f"b{i + 1}{j + 1}_{k}"


def _phi_minus_from(p: int, n: int, unknowns: list[tuple[int, int, int]], x: np.ndarray) -> PolyMat:
    rows = [[MPoly.const(p, S_VARS, int(i == j)) for j in range(n)] for i in range(n)]
    for (i, j, k), value in zip(unknowns, x):
        if value % p:
            rows[i][j] = rows[i][j] + MPoly.monomial(p, S_VARS, int(value), s=k)
    return tuple(tuple(r) for r in rows)


def _points(ctx: FieldCtx) -> tuple[np.ndarray, np.ndarray]:
    el = ctx.elements()
    T, S = (g.ravel() for g in np.meshgrid(el, el, indexing="ij"))
    keep = ctx.add(1, ctx.mul(T, S)) != 0
    return T[keep], S[keep]


def _system(
    datum: GenDatum, ctx: FieldCtx, unknowns: list[tuple[int, int, int]], T: np.ndarray, S: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Коэффициенты (N, n, n, U) и правая часть (N, n, n) над F_q.

    Неизвестная (a, b, k) входит в уравнение (i, b) слагаемым phi(t)_{i,a} s^k
    и в уравнение (a, j) слагаемым -(s/r)^k X_{b,j}, где X = omega(r) phi(t/r).
    """

    n = datum.n
    r = ctx.add(1, ctx.mul(T, S))
    r_inv = ctx.inv(r)
    plus_t = polymat_eval(ctx, datum.phi_plus, {"t": T})
    omega = np.stack([ctx.pow(r, int(w)) for w in datum.weights], axis=-1)
    X = ctx.mul(omega[:, :, None], polymat_eval(ctx, datum.phi_plus, {"t": ctx.mul(T, r_inv)}))
    shrunk = ctx.mul(S, r_inv)
    A = np.zeros((T.size, n, n, len(unknowns)), dtype=np.int64)
    s_pow: dict[int, np.ndarray] = {}
    q_pow: dict[int, np.ndarray] = {}
    for u, (a, b, k) in enumerate(unknowns):
        if k not in s_pow:
            s_pow[k] = ctx.pow(S, k)
            q_pow[k] = ctx.pow(shrunk, k)
        A[:, :, b, u] = ctx.add(A[:, :, b, u], ctx.mul(plus_t[:, :, a], s_pow[k][:, None]))
        A[:, a, :, u] = ctx.sub(A[:, a, :, u], ctx.mul(X[:, b, :], q_pow[k][:, None]))
    return A, ctx.sub(X, plus_t)


def _split_rows(ctx: FieldCtx, A: np.ndarray, rhs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Уравнение над F_q дает m уравнений над F_p: неизвестные лежат в F_p."""

    U = A.shape[-1]
    dA = ctx.digits(A)  # (N, n, n, U, m)
    rows = np.moveaxis(dA, -1, -2).reshape(-1, U)
    return rows, ctx.digits(rhs).reshape(-1)


def _certificate(
    ctx: FieldCtx, unknowns: list[tuple[int, int, int]], T: np.ndarray, S: np.ndarray, n: int, row_index: int, row: np.ndarray
) -> Certificate:
    point, rest = divmod(row_index, n * n * ctx.m)
    entry, digit = divmod(rest, ctx.m)
    i, j = divmod(entry, n)
    p = ctx.p
    names = [_unknown_name(u) for u in unknowns] or ["b"]
    lhs = MPoly.zero(p, names)
    for name, coef in zip(names, row[:-1]):
        if coef % p:
            lhs = lhs + MPoly.monomial(p, names, int(coef), **{name: 1})
    equation = f"{format_poly(lhs)} = {int(row[-1]) % p}"
    if ctx.m > 1:
        equation += f" (F_{p}-coordinate {digit})"
    return Certificate(field=ctx.q, point={"t": int(T[point]), "s": int(S[point])}, entry=[i + 1, j + 1], equation=equation)


def _solve_on_field(
    datum: GenDatum, ctx: FieldCtx, unknowns: list[tuple[int, int, int]]
) -> tuple[str, np.ndarray | None, Certificate | None]:
    """('unique', x, None) | ('inconsistent', None, cert) | ('ambiguous', None, None)."""

    n = datum.n
    U = len(unknowns)
    solver = IncrementalSolver(ctx.p, U)
    T_all, S_all = _points(ctx)
    per_point = n * n * ctx.m * (U + 1)
    step = max(16, ROW_BUDGET // max(per_point, 1))
    x: np.ndarray | None = None
    for start in range(0, T_all.size, step):
        T = T_all[start : start + step]
        S = S_all[start : start + step]
        A, rhs = _system(datum, ctx, unknowns, T, S)
        rows, b = _split_rows(ctx, A, rhs)
        if x is None:
            before = solver.rows_seen
            solver.add_rows(rows, b)
            if not solver.consistent:
                label, row = solver.inconsistent_at  # type: ignore[misc]
                return "inconsistent", None, _certificate(ctx, unknowns, T, S, n, int(label) - before, row)
            if solver.determined:
                x = solver.solution()
            continue
        # решение уже определено: остальные уравнения проверяются подстановкой
        residual = (rows @ x - b) % ctx.p
        bad = np.flatnonzero(residual)
        if bad.size:
            k = int(bad[0])
            row = np.concatenate([rows[k], [b[k]]])
            return "inconsistent", None, _certificate(ctx, unknowns, T, S, n, k, row)
    if x is None:
        logger.debug("phi_minus underdetermined over F_%d: rank %d of %d", ctx.q, solver.rank, U)
        return "ambiguous", None, None
    return "unique", x, None


def escalation_ladder(p: int, bound: int) -> list[int]:
    """Степени m: m0, 2 m0, 4 m0 (m <= 4), где p^{m0} > bound."""

    m0 = next((m for m in range(1, MAX_M + 1) if p**m > bound), MAX_M)
    ladder = [m for m in (m0, 2 * m0, 4 * m0) if m <= MAX_M]
    if MAX_M not in ladder and m0 < MAX_M:
        ladder.append(MAX_M)
    return ladder


def default_degree_bound(datum: GenDatum) -> int:
    """b_{i,j} имеет вес (d_j - d_i)/2 <= d_1."""

    return max(1, max(abs(w) for w in datum.weights))


def _as_t(phi_minus: PolyMat) -> PolyMat:
    return polymat_map(phi_minus, lambda f: rename(f, {"s": "t"}))


def _verified(datum: GenDatum, phi_minus: PolyMat, seed: int) -> bool:
    if not check_ga_homomorphism(_as_t(phi_minus)).passed:
        return False
    return check_opposite_relation(datum.with_phi_minus(phi_minus), seed=seed).passed


def _solve_at_bound(datum: GenDatum, bound: int, seed: int) -> PhiMinusSolution | None:
    unknowns = _unknowns(datum.n, bound)
    tried: list[int] = []
    determined_but_wrong = False
    for m in escalation_ladder(datum.p, bound):
        ctx = get_field(datum.p, m)
        tried.append(ctx.q)
        status, x, cert = _solve_on_field(datum, ctx, unknowns)
        if status == "inconsistent":
            return PhiMinusSolution(
                status="inconsistent",
                phi_minus=None,
                degree_bound=bound,
                fields=tuple(tried),
                certificate=cert,
                note=f"no phi- of degree <= {bound} with F_{datum.p} coefficients satisfies the opposite relation on F_{ctx.q}",
            )
        if status == "unique":
            assert x is not None
            phi_minus = _phi_minus_from(datum.p, datum.n, unknowns, x)
            if _verified(datum, phi_minus, seed):
                return PhiMinusSolution(
                    status="unique",
                    phi_minus=phi_minus,
                    degree_bound=bound,
                    fields=tuple(tried),
                    note="verified: additive in s and opposite relation over two fields",
                )
            determined_but_wrong = True
            logger.debug("solution over F_%d failed verification; escalating", ctx.q)
    if determined_but_wrong:
        return None
    raise AmbiguousSolution(
        f"phi- is not determined by the points of F_q for q in {tried} at degree bound {bound}"
    )


def solve_phi_minus(datum: GenDatum, degree_bound: int | None = None, seed: int = 0) -> PhiMinusSolution:
    """Единственный phi- или сертификат несовместности.

    Несовместность на границе B перепроверяется один раз на 2B.
    """

    if datum.phi_minus is not None:
        datum = datum.with_phi_minus(None)
    bound = degree_bound or default_degree_bound(datum)
    first = _solve_at_bound(datum, bound, seed)
    if first is not None and first.unique:
        return first
    second = _solve_at_bound(datum, 2 * bound, seed)
    if second is None:
        raise DegreeBoundTooSmall(f"no verified phi- at degree bounds {bound} and {2 * bound}")
    if second.unique:
        return second
    return PhiMinusSolution(
        status="inconsistent",
        phi_minus=None,
        degree_bound=second.degree_bound,
        fields=second.fields,
        certificate=second.certificate,
        note=second.note + f"; certified up to degree bound {second.degree_bound} and fields {list(second.fields)}",
    )


# --- interpolation of sigma -----------------------------------------------------------
def normal_form_monomials(di: int, dj: int, degree: int) -> list[tuple[int, int, int, int]]:
    """Мономы a^x b^y c^z d^w без одновременных a и d с бивесом (di, dj) и степенью <= degree."""

    if (di + dj) % 2:
        return []
    x = (di + dj) // 2
    y = (di - dj) // 2
    ea, ed = max(x, 0), max(-x, 0)
    out = []
    g = max(0, -y)
    while True:
        eb, ec = g + y, g
        if ea + eb + ec + ed > degree:
            break
        out.append((ea, eb, ec, ed))
        g += 1
    return out


def _sample_main(ctx: FieldCtx, rng: np.random.Generator, size: int) -> np.ndarray:
    """Матрицы SL(2, F_q) с a != 0: все при малом q, иначе выборка."""

    q = ctx.q
    if (q - 1) * q * q <= FULL_GRID_LIMIT:
        el = ctx.elements()
        a, b, c = (g.ravel() for g in np.meshgrid(el[1:], el, el, indexing="ij"))
    else:
        a = rng.integers(1, q, size=size)
        b = rng.integers(0, q, size=size)
        c = rng.integers(0, q, size=size)
    M = np.zeros((a.size, 2, 2), dtype=np.int64)
    M[:, 0, 0], M[:, 0, 1], M[:, 1, 0] = a, b, c
    M[:, 1, 1] = ctx.div(ctx.add(1, ctx.mul(b, c)), a)
    return M


def _sample_weyl_branch(ctx: FieldCtx, rng: np.random.Generator, size: int) -> np.ndarray:
    q = ctx.q
    if (q - 1) * q <= FULL_GRID_LIMIT:
        el = ctx.elements()
        b, d = (g.ravel() for g in np.meshgrid(el[1:], el, indexing="ij"))
    else:
        b = rng.integers(1, q, size=size)
        d = rng.integers(0, q, size=size)
    M = np.zeros((b.size, 2, 2), dtype=np.int64)
    M[:, 0, 1], M[:, 1, 1] = b, d
    M[:, 1, 0] = ctx.neg(ctx.inv(b))
    return M


def _monomial_values(ctx: FieldCtx, M: np.ndarray, monomials: list[tuple[int, int, int, int]]) -> np.ndarray:
    cols = []
    parts = (M[:, 0, 0], M[:, 0, 1], M[:, 1, 0], M[:, 1, 1])
    for exps in monomials:
        value = np.ones(M.shape[0], dtype=np.int64)
        for x, e in zip(parts, exps):
            if e:
                value = ctx.mul(value, ctx.pow(x, e))
        cols.append(value)
    return np.stack(cols, axis=-1) if cols else np.zeros((M.shape[0], 0), dtype=np.int64)


def _fit_entry(ctx: FieldCtx, M: np.ndarray, values: np.ndarray, monomials: list[tuple[int, int, int, int]]) -> np.ndarray | None:
    """Коэффициенты над F_p; None если система не определена."""

    p = ctx.p
    if not monomials:
        if np.any(values):
            raise InterpolationFailed("entry with odd bi-weight parity does not vanish")
        return np.zeros(0, dtype=np.int64)
    V = _monomial_values(ctx, M, monomials)
    rows = np.moveaxis(ctx.digits(V), -1, -2).reshape(-1, len(monomials))
    rhs = ctx.digits(values).reshape(-1)
    solver = IncrementalSolver(p, len(monomials))
    solver.add_rows(rows, rhs)
    if not solver.consistent:
        raise InterpolationFailed(f"no normal-form polynomial fits the entry over F_{ctx.q}")
    if not solver.determined:
        return None
    return solver.solution()


def _entry_poly(p: int, monomials: list[tuple[int, int, int, int]], coeffs: np.ndarray) -> MPoly:
    terms = {exps: int(c) % p for exps, c in zip(monomials, coeffs) if int(c) % p}
    return MPoly(p, SL2_VARS, terms)


@dataclass(frozen=True)
class AssembledSigma:
    rep: ClosedFormRep
    fields: tuple[int, ...]

    @property
    def note(self) -> str:
        if len(self.fields) > 1:
            return ""
        return f"sigma fitted and checked over F_{self.fields[0]} only; F_{self.fields[0]}^2 exceeds the field ceiling"


def assemble_sigma(datum: GenDatum, seed: int = 0, label: str = "") -> ClosedFormRep:
    """sigma(a, b; c, d) = phi-(c/a) omega(a) phi(b/a), восстановленная интерполяцией.

    Подгонка обязана быть точной на поле интерполяции, на втором поле и на
    ветви a = 0, где sigma(M) = sigma(w) sigma(w^{-1} M). Результат проходит
    check_sl2_homomorphism, иначе InterpolationFailed.
    """

    return assemble_sigma_checked(datum, seed=seed, label=label).rep


def assemble_sigma_checked(datum: GenDatum, seed: int = 0, label: str = "") -> AssembledSigma:
    if datum.phi_minus is None:
        raise ValueError("assemble_sigma needs phi_minus")
    p, n = datum.p, datum.n
    weight_bound = max(abs(w) for w in datum.weights)
    degree = max(1, 2 * weight_bound)
    rng = np.random.default_rng(seed)
    base = field_for(p, degree=degree)
    ladder = [m for m in (base.m, 2 * base.m, 4 * base.m) if m <= MAX_M] or [MAX_M]

    entries: PolyMat | None = None
    used: FieldCtx | None = None
    for m in ladder:
        ctx = get_field(p, m)
        M = _sample_main(ctx, rng, SAMPLE_POINTS)
        values = evaluate(datum, ctx, M)
        rows = []
        complete = True
        for i in range(n):
            row = []
            for j in range(n):
                monomials = normal_form_monomials(datum.weights[i], datum.weights[j], degree)
                coeffs = _fit_entry(ctx, M, values[:, i, j], monomials)
                if coeffs is None:
                    complete = False
                    break
                row.append(_entry_poly(p, monomials, coeffs))
            if not complete:
                break
            rows.append(tuple(row))
        if complete:
            entries = tuple(rows)
            used = ctx
            break
    if entries is None or used is None:
        raise InterpolationFailed(f"normal-form fit is underdetermined up to F_{p}^{ladder[-1]}")

    rep = ClosedFormRep(p=p, entries=entries, twists=(0,), label=label or datum.label)
    fields = evidence_fields(used)
    if len(fields) == 1:
        logger.warning("%s: no second field above F_%d, sigma is checked on one field", rep.label, used.q)
    checks = [(ctx, sampler) for ctx in fields for sampler in (_sample_main, _sample_weyl_branch)]
    for ctx, sampler in checks:
        M = sampler(ctx, rng, SAMPLE_POINTS)
        try:
            expected = evaluate(datum, ctx, M)
        except ZeroInverse as exc:
            raise InterpolationFailed(f"triple product undefined over F_{ctx.q}: {exc}") from exc
        if not np.array_equal(evaluate(rep, ctx, M), expected):
            branch = "a = 0 branch" if sampler is _sample_weyl_branch else "a != 0 points"
            raise InterpolationFailed(f"fitted sigma disagrees with the triple product on {branch} over F_{ctx.q}")
    # the fitted form is fully expanded, so the multiplicativity check runs on field values
    report = check_sl2_homomorphism(rep, mode="exhaustive", ctx=used, seed=seed)
    if not report.passed:
        raise InterpolationFailed(f"fitted sigma is not multiplicative: {report.counterexample}")
    return AssembledSigma(rep, tuple(ctx.q for ctx in fields))


# --- one-step extension -----------------------------------------------------------------
def extend_form(spec: FormSpec, degree_bound: int | None = None, seed: int = 0) -> PhiMinusSolution:
    """Борелевская пара формы, phi- и, если он есть, собранная sigma."""

    datum = build_borel_pair(spec)
    solution = solve_phi_minus(datum, degree_bound=degree_bound, seed=seed)
    if not solution.unique:
        return solution
    assembled = assemble_sigma_checked(datum.with_phi_minus(solution.phi_minus), seed=seed, label=f"star:{spec.label}")
    return PhiMinusSolution(
        status=solution.status,
        phi_minus=solution.phi_minus,
        degree_bound=solution.degree_bound,
        fields=solution.fields,
        note="; ".join(part for part in (solution.note, assembled.note) if part),
        sigma=assembled.rep,
    )


def tau_pair(datum: GenDatum) -> GenDatum:
    """(tau phi, omega): продолжаемость сохраняется при tau."""

    return GenDatum(p=datum.p, phi_plus=tau_transpose(datum.phi_plus), weights=datum.weights, label=datum.label)  # type: ignore[arg-type]
