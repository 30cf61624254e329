"""Замкнутые формы sigma*, sigma+ и sigma#.

sigma* однобложных форм собирается символьно из тройки phi-(c/a) omega(a) phi*(b/a)
при нулевых показателях и затем скручивается Фробениусом. sigma+ и sigma#
записаны таблично в текстовом формате многочленов.
"""

from __future__ import annotations

from collections import defaultdict
from collections.abc import Sequence
from functools import lru_cache

from ..errors import BadCharacteristic, BadParams, InterpolationFailed
from ..linalg import PolyMat, direct_sum, kron_product, polymat_const, polymat_reduce
from ..symbolic import MPoly, parse_poly
from .borel import build_borel_pair, extension_constraints, phi_minus_closed_form
from .contracts import SL2_VARS, ClosedFormRep, FormSpec, GenDatum, block_vars

# --- transcribed bases (untwisted) -----------------------------------------------
PLUS_TEXT: dict[str, list[list[str]]] = {
    "I": [
        ["a^3", "a^2*b", "1/2*a*b^2", "1/6*b^3"],
        ["3*a^2*c", "a*(a*d + 2*b*c)", "b*(a*d + 1/2*b*c)", "1/2*b^2*d"],
        ["6*a*c^2", "4*c*(a*d + 1/2*b*c)", "d*(a*d + 2*b*c)", "b*d^2"],
        ["6*c^3", "6*c^2*d", "3*c*d^2", "d^3"],
    ],
    "II": [
        ["a^3", "b^3", "a^2*b", "1/2*a*b^2"],
        ["c^3", "d^3", "c^2*d", "1/2*c*d^2"],
        ["0", "0", "a", "b"],
        ["0", "0", "c", "d"],
    ],
    "V": [
        ["1", "0", "0", "0"],
        ["a*b", "a^2", "b^2", "0"],
        ["c*d", "c^2", "d^2", "0"],
        ["b*c", "a*c", "b*d", "1"],
    ],
    "VII": [
        ["a", "b", "1/2*a^2*c", "1/2*b^2*d"],
        ["c", "d", "a*c^2", "b*d^2"],
        ["0", "0", "a^3", "b^3"],
        ["0", "0", "c^3", "d^3"],
    ],
    "IX": [
        ["a^2", "a*b", "1/2*b^2", "0"],
        ["2*a*c", "a*d + b*c", "b*d", "0"],
        ["2*c^2", "2*c*d", "d^2", "0"],
        ["0", "0", "0", "1"],
    ],
    "XI": [
        ["a^2", "b^2", "a*b", "0"],
        ["c^2", "d^2", "c*d", "0"],
        ["0", "0", "1", "0"],
        ["0", "0", "0", "1"],
    ],
    "XIX": [
        ["a^2", "b^2", "0", "0"],
        ["c^2", "d^2", "0", "0"],
        ["a*c", "b*d", "1", "0"],
        ["0", "0", "0", "1"],
    ],
    "XXI": [
        ["1", "a*c", "b*d", "b*c"],
        ["0", "a^2", "b^2", "a*b"],
        ["0", "c^2", "d^2", "c*d"],
        ["0", "0", "0", "1"],
    ],
}

SHARP_TEXT: dict[str, list[list[str]]] = {
    "I": [
        ["a^3", "a^2*b", "a*b^2", "b^3"],
        ["3*a^2*c", "a*(a*d + 2*b*c)", "b*(2*a*d + b*c)", "3*b^2*d"],
        ["3*a*c^2", "c*(2*a*d + b*c)", "d*(a*d + 2*b*c)", "3*b*d^2"],
        ["c^3", "c^2*d", "c*d^2", "d^3"],
    ],
    "IX": [
        ["a^2", "a*b", "b^2", "0"],
        ["2*a*c", "a*d + b*c", "2*b*d", "0"],
        ["c^2", "c*d", "d^2", "0"],
        ["0", "0", "0", "1"],
    ],
}

# Характеристика, при которой форма определена: ("eq", p) или ("ge", p).
CHAR_RULES: dict[str, tuple[str, int]] = {
    "I": ("ge", 5),
    "II": ("eq", 3),
    "VII": ("eq", 3),
    "IX": ("ge", 3),
    "V": ("eq", 2),
    "XI": ("eq", 2),
    "XIX": ("eq", 2),
    "XXI": ("eq", 2),
}

SHARP_PARAMS: dict[str, tuple[str, ...]] = {
    "I": ("e1",),
    "II": ("e1",),
    "IV": ("e1", "e2"),
    "V": ("e1",),
    "VII": ("e1",),
    "IX": ("e1",),
    "XI": ("e1",),
    "XV": ("e2", "e3"),
    "XIX": ("e1",),
    "XXIV": ("e2",),
    "XXVI": (),
}

STAR_TWIST: dict[str, str] = {"XXIV": "e2"}

# d(sigma) = (dim V^sigma, dim W^sigma) для sigma*; сопряжение его не меняет.
STAR_FIXED_DIMS: dict[str, tuple[int, int]] = {
    "I": (0, 0),
    "II": (0, 0),
    "IV": (0, 0),
    "V": (1, 1),
    "VII": (0, 0),
    "IX": (1, 1),
    "XI": (1, 2),
    "XV": (0, 0),
    "XIX": (2, 1),
    "XXIV": (2, 2),
    "XXVI": (4, 4),
}


def parse_matrix(rows: Sequence[Sequence[str]], p: int, vars: Sequence[str] = SL2_VARS) -> PolyMat:
    return polymat_reduce(tuple(tuple(parse_poly(text, p, vars) for text in row) for row in rows))


def sl2_natural(p: int, vars: Sequence[str] = SL2_VARS, block: Sequence[str] | None = None) -> PolyMat:
    """Естественное представление X = (a, b; c, d) на переменных блока."""

    a, b, c, d = block or vars
    return parse_matrix([[a, b], [c, d]], p, vars)


def check_char(label: str, p: int, what: str) -> None:
    rule = CHAR_RULES.get(label)
    if rule is None:
        return
    op, bound = rule
    if op == "eq" and p != bound:
        raise BadCharacteristic(f"{what}:{label} requires p = {bound}, got {p}")
    if op == "ge" and p < bound:
        raise BadCharacteristic(f"{what}:{label} requires p >= {bound}, got {p}")


def _require(spec: FormSpec, names: Sequence[str]) -> dict[str, int]:
    got = spec.param_map
    missing = [n for n in names if n not in got]
    if missing:
        raise BadParams(f"{spec.form} requires params {list(names)}; missing {missing}")
    extra = [n for n in got if n not in names]
    if extra:
        raise BadParams(f"{spec.form} does not take params {extra}")
    return got


# --- symbolic assembly of the triple ------------------------------------------------
def _divide_by_one_plus(coeffs: list[int], k: int, p: int) -> list[int]:
    """Частное P(X) / (1+X)^k; остаток обязан быть нулевым."""

    out = list(coeffs)
    for _ in range(k):
        if not any(out):
            return []
        quotient: list[int] = []
        prev = 0
        for m in range(len(out) - 1):
            cur = (out[m] - prev) % p
            quotient.append(cur)
            prev = cur
        if (out[-1] - prev) % p:
            raise InterpolationFailed("Laurent coefficient is not divisible by (1 + bc)")
        out = quotient
    return out


def assemble_triple(datum: GenDatum) -> PolyMat:
    """Нормальная форма phi-(c/a) omega(a) phi+(b/a) как многочлен от (a, b, c, d).

    Слагаемое с a^{-k} имеет вид g_k(b, c) a^{-k}; так как a^{-1} = d/(1+bc),
    g_k делится на (1+bc)^k и дает d^k h_k.
    """

    if datum.phi_minus is None:
        raise ValueError("assemble_triple needs phi_minus")
    p, n = datum.p, datum.n
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            laurent: dict[tuple[int, int, int], int] = defaultdict(int)
            for k in range(n):
                left = datum.phi_minus[i][k]
                right = datum.phi_plus[k][j]
                for (x,), beta in left.terms.items():
                    for (y,), alpha in right.terms.items():
                        laurent[(datum.weights[k] - x - y, y, x)] += alpha * beta
            row.append(_laurent_to_normal_form(laurent, p))
        rows.append(tuple(row))
    return tuple(rows)


def _laurent_to_normal_form(laurent: dict[tuple[int, int, int], int], p: int) -> MPoly:
    terms: dict[tuple[int, int, int, int], int] = defaultdict(int)
    negative: dict[int, dict[int, dict[int, int]]] = defaultdict(lambda: defaultdict(dict))
    for (ea, eb, ec), coef in laurent.items():
        coef %= p
        if not coef:
            continue
        if ea >= 0:
            terms[(ea, eb, ec, 0)] += coef
        else:
            group = negative[-ea][eb - ec]
            power = min(eb, ec)
            group[power] = (group.get(power, 0) + coef) % p
    for k, by_delta in negative.items():
        for delta, poly in by_delta.items():
            top = max(poly)
            coeffs = [poly.get(m, 0) for m in range(top + 1)]
            quotient = _divide_by_one_plus(coeffs, k, p)
            for m, coef in enumerate(quotient):
                if coef:
                    terms[(0, m + max(delta, 0), m + max(-delta, 0), k)] += coef
    return MPoly(p, SL2_VARS, terms)


# --- per-kind builders ------------------------------------------------------------
def star_borel_spec(spec: FormSpec) -> FormSpec:
    """Борелевская спецификация sigma* с параметрами, навязанными продолжением."""

    got = dict(spec.param_map)
    label = spec.label
    p = spec.p
    if label in ("V",):
        got.setdefault("f", got.get("e1", 0) + 1)
    elif label in ("XI", "XIX"):
        got.setdefault("e3", got.get("e1", 0) + 1)
    elif label == "XXII":
        if "e1" in got:
            got.setdefault("d1", p ** got["e1"])
    elif label == "XXIV":
        got.setdefault("d2", 0)
    elif label == "XXVI":
        got.setdefault("d1", 0)
        got.setdefault("d2", 0)
    borel = FormSpec.make(f"borel:{label}", p, got)
    extension_constraints(borel)
    return borel


@lru_cache(maxsize=256)
def _star_base(label: str, p: int) -> PolyMat:
    base_params: dict[str, dict[str, int]] = {
        "V": {"e1": 0, "f": 1},
        "XI": {"e1": 0, "e3": 1},
        "XIX": {"e1": 0, "e3": 1},
        "XXII": {"e1": 0, "d1": 1},
        "XXIV": {"e2": 0, "d2": 0},
        "XXVI": {"d1": 0, "d2": 0},
    }
    params = base_params.get(label, {"e1": 0})
    borel = FormSpec.make(f"borel:{label}", p, params)
    datum = build_borel_pair(borel).with_phi_minus(phi_minus_closed_form(borel))
    return assemble_triple(datum)


def _two_block_kron(p: int, twists: tuple[int, int], label: str) -> ClosedFormRep:
    """theta(X^{(e)}, X^{(e')}) = X^{(e)} (x) X^{(e')}."""

    vars = block_vars(0) + block_vars(1)
    entries = kron_product(sl2_natural(p, vars, block_vars(0)), sl2_natural(p, vars, block_vars(1)))
    return ClosedFormRep(p=p, entries=entries, twists=twists, label=label)  # type: ignore[arg-type]


def _two_block_sum(p: int, twists: tuple[int, int], label: str, corners: bool) -> ClosedFormRep:
    """X^{(e)} + X^{(e')}: либо стандартная прямая сумма, либо первый блок в углах."""

    vars = block_vars(0) + block_vars(1)
    a1, b1, c1, d1 = (MPoly.var(p, vars, v) for v in block_vars(0))
    a2, b2, c2, d2 = (MPoly.var(p, vars, v) for v in block_vars(1))
    zero = MPoly.zero(p, vars)
    if corners:
        rows = [[a1, zero, zero, b1], [zero, a2, b2, zero], [zero, c2, d2, zero], [c1, zero, zero, d1]]
    else:
        rows = [[a1, b1, zero, zero], [c1, d1, zero, zero], [zero, zero, a2, b2], [zero, zero, c2, d2]]
    return ClosedFormRep(p=p, entries=tuple(tuple(r) for r in rows), twists=twists, label=label)


def build_star(spec: FormSpec) -> ClosedFormRep:
    borel = star_borel_spec(spec)
    params = borel.param_map
    if spec.label == "IV":
        return _two_block_kron(spec.p, (params["e2"], params["e1"]), spec.form)
    if spec.label == "XV":
        return _two_block_sum(spec.p, (params["e2"], params["e3"]), spec.form, corners=True)
    twist = params.get(STAR_TWIST.get(spec.label, "e1"), 0)
    return ClosedFormRep(p=spec.p, entries=_star_base(spec.label, spec.p), twists=(twist,), label=spec.form)


def plus_entries(label: str, p: int) -> PolyMat:
    check_char(label, p, "plus")
    if label in PLUS_TEXT:
        return parse_matrix(PLUS_TEXT[label], p)
    X = sl2_natural(p)
    if label == "IV":
        return polymat_reduce(kron_product(X, X))  # type: ignore[arg-type]
    if label == "XV":
        return direct_sum(X, X)  # type: ignore[return-value]
    if label == "XXIV":
        return direct_sum(X, polymat_const(p, SL2_VARS, [[1, 0], [0, 1]]))  # type: ignore[return-value]
    if label == "XXVI":
        return polymat_const(p, SL2_VARS, [[int(i == j) for j in range(4)] for i in range(4)])
    raise BadParams(f"no plus form for {label}")


def build_plus(spec: FormSpec) -> ClosedFormRep:
    _require(spec, ())
    return ClosedFormRep(p=spec.p, entries=plus_entries(spec.label, spec.p), twists=(0,), label=spec.form)


def build_sharp(spec: FormSpec) -> ClosedFormRep:
    label, p = spec.label, spec.p
    check_char(label, p, "sharp")
    params = _require(spec, SHARP_PARAMS[label])
    if label == "IV":
        if not params["e2"] > params["e1"]:
            raise BadParams(f"{spec.form} requires e2 > e1")
        return _two_block_kron(p, (params["e2"], params["e1"]), spec.form)
    if label == "XV":
        if not params["e2"] >= params["e3"]:
            raise BadParams(f"{spec.form} requires e2 >= e3")
        return _two_block_sum(p, (params["e2"], params["e3"]), spec.form, corners=False)
    if label == "XXVI":
        return ClosedFormRep(p=p, entries=plus_entries("XXVI", p), twists=(0,), label=spec.form)
    entries = parse_matrix(SHARP_TEXT[label], p) if label in SHARP_TEXT else plus_entries(label, p)
    twist = params["e2"] if label == "XXIV" else params["e1"]
    return ClosedFormRep(p=p, entries=entries, twists=(twist,), label=spec.form)
