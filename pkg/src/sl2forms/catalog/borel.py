"""26 канонических борелевских пар (phi*, omega*) и решения phi- для продолжаемых форм.

Элемент формы задается как (i, j, коэффициент, степень): a_{i,j}(t) = coef * t^deg,
индексы 1-based. Коэффициенты 1/2 и 1/6 понимаются как обратные в F_p.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
from fractions import Fraction

from ..errors import BadCharacteristic, BadParams
from ..linalg import PolyMat
from ..symbolic import MPoly
from .contracts import EXTENDABLE_FORMS, FormSpec, GenDatum

T_VARS = ("t",)
S_VARS = ("s",)

HALF = Fraction(1, 2)
SIXTH = Fraction(1, 6)

Entry = tuple[int, int, int | Fraction, int]


@dataclass(frozen=True)
class _Powers:
    """Значения p^{e_k} и p^f для конкретной спецификации."""

    p: int
    E: int
    E1: int
    E2: int
    E3: int
    E4: int
    F: int
    d1: int | None
    d2: int | None


@dataclass(frozen=True)
class BorelRow:
    label: str
    params: tuple[str, ...]
    entries: Callable[[_Powers], list[Entry]]
    weights: Callable[[_Powers], tuple[int, int]]
    check: Callable[[_Powers, FormSpec], None]


def _need(cond: bool, message: str) -> None:
    if not cond:
        raise BadParams(message)


def _char(spec: FormSpec, *, exactly: int | None = None, at_least: int | None = None) -> None:
    if exactly is not None and spec.p != exactly:
        raise BadCharacteristic(f"{spec.form} requires p = {exactly}, got {spec.p}")
    if at_least is not None and spec.p < at_least:
        raise BadCharacteristic(f"{spec.form} requires p >= {at_least}, got {spec.p}")


def _no_check(_: _Powers, __: FormSpec) -> None:
    return None


def _p_ge(bound: int) -> Callable[[_Powers, FormSpec], None]:
    return lambda _, spec: _char(spec, at_least=bound)


def _p_eq(value: int) -> Callable[[_Powers, FormSpec], None]:
    return lambda _, spec: _char(spec, exactly=value)


def _check_iv(w: _Powers, spec: FormSpec) -> None:
    _need(spec.param("e2") > spec.param("e1"), f"{spec.form} requires e2 > e1")


def _check_v(w: _Powers, spec: FormSpec) -> None:
    _need(spec.param("f") >= spec.param("e1") + 1, f"{spec.form} requires f >= e1 + 1")


def _check_xi(w: _Powers, spec: FormSpec) -> None:
    _need(spec.param("e3") >= spec.param("e1") + 1, f"{spec.form} requires e3 >= e1 + 1")


def _check_xiii(w: _Powers, spec: FormSpec) -> None:
    _need(spec.param("e1") > spec.param("e3"), f"{spec.form} requires e1 > e3")


def _check_xv(w: _Powers, spec: FormSpec) -> None:
    _need(spec.param("e2") >= spec.param("e3"), f"{spec.form} requires e2 >= e3")


def _check_xvi(w: _Powers, spec: FormSpec) -> None:
    _need(spec.param("e4") > spec.param("e3"), f"{spec.form} requires e4 > e3")


def _check_xvii(w: _Powers, spec: FormSpec) -> None:
    _need(spec.param("d1") >= w.E3, f"{spec.form} requires d1 >= p^e3 = {w.E3}")


def _check_xxi(w: _Powers, spec: FormSpec) -> None:
    _char(spec, exactly=2)


def _check_xxii(w: _Powers, spec: FormSpec) -> None:
    d1 = spec.param("d1")
    _need(2 * w.E >= d1 >= w.E, f"{spec.form} requires 2p^e1 >= d1 >= p^e1, got d1={d1}")


def _check_xxiv(w: _Powers, spec: FormSpec) -> None:
    d2 = spec.param("d2")
    _need(w.E2 >= d2, f"{spec.form} requires p^e2 >= d2, got d2={d2}")


def _check_xxv(w: _Powers, spec: FormSpec) -> None:
    d1 = spec.param("d1")
    _need(2 * w.E3 >= d1 >= w.E3, f"{spec.form} requires 2p^e3 >= d1 >= p^e3, got d1={d1}")


def _check_xxvi(w: _Powers, spec: FormSpec) -> None:
    _need(spec.param("d1") >= spec.param("d2"), f"{spec.form} requires d1 >= d2")


BOREL_TABLE: dict[str, BorelRow] = {
    row.label: row
    for row in [
        BorelRow(
            "I", ("e1",),
            lambda w: [(1, 2, 1, w.E), (1, 3, HALF, 2 * w.E), (1, 4, SIXTH, 3 * w.E),
                       (2, 3, 1, w.E), (2, 4, HALF, 2 * w.E), (3, 4, 1, w.E)],
            lambda w: (3 * w.E, w.E),
            _p_ge(5),
        ),
        BorelRow(
            "II", ("e1",),
            lambda w: [(1, 2, 1, w.E), (1, 3, HALF, 2 * w.E), (1, 4, 1, w.p * w.E), (2, 3, 1, w.E)],
            lambda w: (w.p * w.E, w.E),
            _p_eq(3),
        ),
        BorelRow(
            "III", ("e1",),
            lambda w: [(1, 2, 1, w.E), (1, 3, HALF, 2 * w.E), (2, 3, 1, w.E)],
            lambda w: (3 * w.E, w.E),
            _p_ge(3),
        ),
        BorelRow(
            "IV", ("e1", "e2"),
            lambda w: [(1, 2, 1, w.E1), (1, 3, 1, w.E2), (1, 4, 1, w.E1 + w.E2), (2, 4, 1, w.E2), (3, 4, 1, w.E1)],
            lambda w: (w.E1 + w.E2, w.E2 - w.E1),
            _check_iv,
        ),
        BorelRow(
            "V", ("e1", "f"),
            lambda w: [(1, 2, 1, w.E), (1, 4, 1, w.F), (3, 4, 1, w.E)],
            lambda w: (w.F, w.F - 2 * w.E),
            _check_v,
        ),
        BorelRow(
            "VI", ("e1", "d2"),
            lambda w: [(1, 2, 1, w.E), (3, 4, 1, w.E)],
            lambda w: (w.d2 + 2 * w.E, w.d2),  # type: ignore[operator]
            _no_check,
        ),
        BorelRow(
            "VII", ("e1",),
            lambda w: [(1, 4, 1, w.p * w.E), (2, 3, 1, w.E), (2, 4, HALF, 2 * w.E), (3, 4, 1, w.E)],
            lambda w: (w.p * w.E, w.E),
            _p_eq(3),
        ),
        BorelRow(
            "VIII", ("e1",),
            lambda w: [(2, 3, 1, w.E), (2, 4, HALF, 2 * w.E), (3, 4, 1, w.E)],
            lambda w: (3 * w.E, w.E),
            _p_ge(3),
        ),
        BorelRow(
            "IX", ("e1",),
            # степень (1,4) равна 2p^{e1}: разрыв весов 4p^{e1}, деленный пополам
            lambda w: [(1, 2, 1, w.E), (1, 4, HALF, 2 * w.E), (2, 4, 1, w.E)],
            lambda w: (2 * w.E, 0),
            _p_ge(3),
        ),
        BorelRow(
            "X", ("e1", "e2"),
            lambda w: [(1, 2, 1, w.E1), (1, 3, 1, w.E2)],
            lambda w: (w.E1 + w.E2, w.E2 - w.E1),
            _check_iv,
        ),
        BorelRow(
            "XI", ("e1", "e3"),
            lambda w: [(1, 2, 1, w.E), (1, 4, 1, w.E3)],
            lambda w: (w.E3, w.E3 - 2 * w.E),
            _check_xi,
        ),
        BorelRow(
            "XII", ("e1", "d2"),
            lambda w: [(1, 2, 1, w.E)],
            lambda w: (2 * w.E + w.d2, w.d2),  # type: ignore[operator]
            _no_check,
        ),
        BorelRow(
            "XIII", ("e1", "e3"),
            lambda w: [(1, 3, 1, w.E1), (2, 3, 1, w.E3), (2, 4, 1, w.E1)],
            lambda w: (2 * w.E1 - w.E3, w.E3),
            _check_xiii,
        ),
        BorelRow(
            "XIV", ("e1", "e3"),
            lambda w: [(1, 3, 1, w.E1), (2, 3, 1, w.E3)],
            lambda w: (2 * w.E1 - w.E3, w.E3),
            _check_xiii,
        ),
        BorelRow(
            "XV", ("e2", "e3"),
            lambda w: [(1, 4, 1, w.E2), (2, 3, 1, w.E3)],
            lambda w: (w.E2, w.E3),
            _check_xv,
        ),
        BorelRow(
            "XVI", ("e3", "e4"),
            lambda w: [(2, 3, 1, w.E3), (2, 4, 1, w.E4)],
            lambda w: (2 * w.E4 - w.E3, w.E3),
            _check_xvi,
        ),
        BorelRow(
            "XVII", ("e3", "d1"),
            lambda w: [(2, 3, 1, w.E3)],
            lambda w: (w.d1, w.E3),  # type: ignore[return-value]
            _check_xvii,
        ),
        BorelRow(
            "XVIII", ("e1", "e2"),
            lambda w: [(2, 4, 1, w.E2), (3, 4, 1, w.E1)],
            lambda w: (w.E1 + w.E2, w.E2 - w.E1),
            _check_iv,
        ),
        BorelRow(
            "XIX", ("e1", "e3"),
            lambda w: [(1, 4, 1, w.E3), (3, 4, 1, w.E)],
            lambda w: (w.E3, w.E3 - 2 * w.E),
            _check_xi,
        ),
        BorelRow(
            "XX", ("e1", "d2"),
            lambda w: [(3, 4, 1, w.E)],
            lambda w: (2 * w.E + w.d2, w.d2),  # type: ignore[operator]
            _no_check,
        ),
        BorelRow(
            "XXI", ("e1",),
            lambda w: [(1, 3, 1, w.E), (1, 4, 1, w.p * w.E), (2, 4, 1, w.E)],
            lambda w: (w.p * w.E, 0),
            _check_xxi,
        ),
        BorelRow(
            "XXII", ("e1", "d1"),
            lambda w: [(1, 3, 1, w.E), (2, 4, 1, w.E)],
            lambda w: (w.d1, 2 * w.E - w.d1),  # type: ignore[operator]
            _check_xxii,
        ),
        BorelRow(
            "XXIII", ("e1", "d1"),
            lambda w: [(1, 3, 1, w.E)],
            lambda w: (w.d1, 2 * w.E - w.d1),  # type: ignore[operator]
            _check_xxii,
        ),
        BorelRow(
            "XXIV", ("e2", "d2"),
            lambda w: [(1, 4, 1, w.E2)],
            lambda w: (w.E2, w.d2),  # type: ignore[return-value]
            _check_xxiv,
        ),
        BorelRow(
            "XXV", ("e3", "d1"),
            lambda w: [(2, 4, 1, w.E3)],
            lambda w: (w.d1, 2 * w.E3 - w.d1),  # type: ignore[operator]
            _check_xxv,
        ),
        BorelRow(
            "XXVI", ("d1", "d2"),
            lambda w: [],
            lambda w: (w.d1, w.d2),  # type: ignore[return-value]
            _check_xxvi,
        ),
    ]
}  # fmt: skip


def _powers(spec: FormSpec) -> _Powers:
    p = spec.p
    get = spec.param_map.get
    e1 = get("e1", 0)
    return _Powers(
        p=p,
        E=p**e1,
        E1=p**e1,
        E2=p ** get("e2", 0),
        E3=p ** get("e3", 0),
        E4=p ** get("e4", 0),
        F=p ** get("f", 0),
        d1=get("d1"),
        d2=get("d2"),
    )


def validate_borel(spec: FormSpec) -> BorelRow:
    if spec.kind != "borel":
        raise BadParams(f"expected a borel form, got {spec.form}")
    row = BOREL_TABLE[spec.label]
    missing = [name for name in row.params if name not in spec.param_map]
    if missing:
        raise BadParams(f"{spec.form} requires params {list(row.params)}; missing {missing}")
    extra = [name for name in spec.param_map if name not in row.params]
    if extra:
        raise BadParams(f"{spec.form} does not take params {extra}")
    row.check(_powers(spec), spec)
    return row


def _unitriangular(p: int, vars: tuple[str, ...], n: int, entries: list[Entry], lower: bool = False) -> PolyMat:
    (var,) = vars
    rows = [[MPoly.const(p, vars, 1 if i == j else 0) for j in range(n)] for i in range(n)]
    for i, j, coef, degree in entries:
        if (i > j) != lower or i == j:
            raise ValueError(f"entry ({i},{j}) breaks the triangular shape")
        rows[i - 1][j - 1] = MPoly.monomial(p, vars, coef, **{var: degree})
    return tuple(tuple(r) for r in rows)


def borel_weights(spec: FormSpec) -> tuple[int, int, int, int]:
    row = validate_borel(spec)
    d1, d2 = row.weights(_powers(spec))
    return (d1, d2, -d2, -d1)


def build_borel_pair(spec: FormSpec) -> GenDatum:
    """phi*(t) и omega* = diag(u^{d1}, u^{d2}, u^{-d2}, u^{-d1}) в точности по таблице форм."""

    row = validate_borel(spec)
    w = _powers(spec)
    d1, d2 = row.weights(w)
    phi = _unitriangular(spec.p, T_VARS, 4, row.entries(w))
    return GenDatum(p=spec.p, phi_plus=phi, weights=(d1, d2, -d2, -d1), label=spec.form)


# --- phi- of the extendable forms --------------------------------------------------
PHI_MINUS_TABLE: dict[str, Callable[[_Powers], list[Entry]]] = {
    "I": lambda w: [(2, 1, 3, w.E), (3, 1, 6, 2 * w.E), (3, 2, 4, w.E),
                    (4, 1, 6, 3 * w.E), (4, 2, 6, 2 * w.E), (4, 3, 3, w.E)],
    "II": lambda w: [(3, 2, 1, w.E), (4, 1, 1, w.p * w.E), (4, 2, 1, 2 * w.E), (4, 3, HALF, w.E)],
    "IV": lambda w: [(2, 1, 1, w.E1), (3, 1, 1, w.E2), (4, 1, 1, w.E1 + w.E2), (4, 2, 1, w.E2), (4, 3, 1, w.E1)],
    "V": lambda w: [(3, 1, 1, w.E), (4, 1, 1, 2 * w.E), (4, 2, 1, w.E)],
    "VII": lambda w: [(2, 1, HALF, w.E), (3, 1, 1, 2 * w.E), (3, 2, 1, w.E), (4, 1, 1, w.p * w.E)],
    "IX": lambda w: [(2, 1, 2, w.E), (4, 1, 2, 2 * w.E), (4, 2, 2, w.E)],
    "XI": lambda w: [(4, 1, 1, w.E3), (4, 2, 1, w.E)],
    "XV": lambda w: [(3, 2, 1, w.E3), (4, 1, 1, w.E2)],
    "XIX": lambda w: [(3, 1, 1, w.E), (4, 1, 1, w.E3)],
    "XXI": lambda w: [(2, 1, 1, w.E), (4, 1, 1, 2 * w.E), (4, 3, 1, w.E)],
    "XXII": lambda w: [(3, 1, 1, w.E), (4, 2, 1, w.E)],
    "XXIV": lambda w: [(4, 1, 1, w.E2)],
    "XXVI": lambda w: [],
}  # fmt: skip


def extension_constraints(spec: FormSpec) -> None:
    """Ограничения, которые навязывает существование phi-; BadParams если форма не продолжается."""

    validate_borel(spec)
    label = spec.label
    if label not in EXTENDABLE_FORMS:
        raise BadParams(f"{spec.form} admits no extension to SL(2)")
    get = spec.param_map.get
    if label == "V":
        _char(spec, exactly=2)
        _need(get("f") == get("e1", 0) + 1, f"{spec.form} extends only for f = e1 + 1")
    elif label in ("XI", "XIX"):
        _char(spec, exactly=2)
        _need(get("e3") == get("e1", 0) + 1, f"{spec.form} extends only for e3 = e1 + 1")
    elif label == "XXII":
        _need(get("d1") == spec.p ** get("e1", 0), f"{spec.form} extends only for d1 = p^e1")
    elif label == "XXIV":
        _need(get("d2") == 0, f"{spec.form} extends only for d2 = 0")
    elif label == "XXVI":
        _need(get("d1") == 0 and get("d2") == 0, f"{spec.form} extends only for d1 = d2 = 0")


def phi_minus_closed_form(spec: FormSpec) -> PolyMat:
    extension_constraints(spec)
    entries = PHI_MINUS_TABLE[spec.label](_powers(spec))
    return _unitriangular(spec.p, S_VARS, 4, entries, lower=True)


def extended_datum(spec: FormSpec) -> GenDatum:
    return build_borel_pair(spec).with_phi_minus(phi_minus_closed_form(spec))


def partition_class(phi: PolyMat) -> tuple[int, ...]:
    """Упорядоченное разбиение [l1, ..., lv] по нулям наддиагонали phi(t)."""

    n = len(phi)
    parts: list[int] = []
    size = 1
    for i in range(n - 1):
        if phi[i][i + 1].is_zero():
            parts.append(size)
            size = 1
        else:
            size += 1
    parts.append(size)
    return tuple(parts)
