"""Семейства малой размерности n <= 3 и их роли в разложениях."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import BadCharacteristic, BadParams
from ..linalg import PolyMat, direct_sum, polymat_const
from .closed_forms import parse_matrix, sl2_natural
from .contracts import SL2_VARS, ClosedFormRep, FormSpec


@dataclass(frozen=True)
class SmallFamily:
    label: str
    dim: int
    twisted: bool
    char: str  # "any", "2" или "odd"
    indecomposable: bool
    # Разложение на неразложимые метки малого каталога; пусто для неразложимых.
    parts: tuple[str, ...] = ()


SMALL_FAMILIES: dict[str, SmallFamily] = {
    fam.label: fam
    for fam in [
        SmallFamily("1", 1, False, "any", True),
        SmallFamily("2.1", 2, True, "any", True),
        SmallFamily("2.2", 2, False, "any", False, ("1", "1")),
        SmallFamily("3.1a", 3, True, "2", True),
        SmallFamily("3.1b", 3, True, "2", True),
        SmallFamily("3.1c", 3, True, "2", False, ("2.1", "1")),
        SmallFamily("3.1d", 3, False, "2", False, ("1", "1", "1")),
        SmallFamily("3.2a", 3, True, "odd", True),
        SmallFamily("3.2b", 3, True, "odd", False, ("2.1", "1")),
        SmallFamily("3.2c", 3, False, "odd", False, ("1", "1", "1")),
    ]
}

SMALL_TEXT: dict[str, list[list[str]]] = {
    "3.1a": [["a^2", "b^2", "0"], ["c^2", "d^2", "0"], ["a*c", "b*d", "1"]],
    "3.1b": [["a^2", "b^2", "a*b"], ["c^2", "d^2", "c*d"], ["0", "0", "1"]],
    "3.2a": [["a^2", "a*b", "b^2"], ["2*a*c", "a*d + b*c", "2*b*d"], ["c^2", "c*d", "d^2"]],
}


def small_applies(label: str, p: int) -> bool:
    char = SMALL_FAMILIES[label].char
    return char == "any" or (char == "2" and p == 2) or (char == "odd" and p >= 3)


def _identity(p: int, n: int) -> PolyMat:
    return polymat_const(p, SL2_VARS, [[int(i == j) for j in range(n)] for i in range(n)])


def small_entries(label: str, p: int) -> PolyMat:
    if label in SMALL_TEXT:
        return parse_matrix(SMALL_TEXT[label], p)
    if label == "2.1":
        return sl2_natural(p)
    if label in ("3.1c", "3.2b"):
        return direct_sum(sl2_natural(p), _identity(p, 1))  # type: ignore[return-value]
    n = SMALL_FAMILIES[label].dim
    return _identity(p, n)


def build_small(spec: FormSpec) -> ClosedFormRep:
    fam = SMALL_FAMILIES[spec.label]
    if not small_applies(spec.label, spec.p):
        need = "p = 2" if fam.char == "2" else "p >= 3"
        raise BadCharacteristic(f"small:{spec.label} requires {need}, got p={spec.p}")
    params = spec.param_map
    if fam.twisted:
        if set(params) != {"e"}:
            raise BadParams(f"small:{spec.label} requires exactly the param e")
        twist = params["e"]
    else:
        if params:
            raise BadParams(f"small:{spec.label} takes no params")
        twist = 0
    return ClosedFormRep(p=spec.p, entries=small_entries(spec.label, spec.p), twists=(twist,), label=spec.form)


# Неразложимые слагаемые sigma#: (метка малого семейства, параметр sigma#, дающий твист).
# Формы вне таблицы неразложимы.
SHARP_DECOMPOSITIONS: dict[str, tuple[tuple[str, str | None], ...]] = {
    "IX": (("3.2a", "e1"), ("1", None)),
    "XI": (("3.1b", "e1"), ("1", None)),
    "XV": (("2.1", "e2"), ("2.1", "e3")),
    "XIX": (("3.1a", "e1"), ("1", None)),
    "XXIV": (("2.1", "e2"), ("1", None), ("1", None)),
    "XXVI": (("1", None),) * 4,
}


def _with_multiplicity(specs: list[FormSpec]) -> list[tuple[FormSpec, int]]:
    counts: dict[FormSpec, int] = {}
    for spec in specs:
        counts[spec] = counts.get(spec, 0) + 1
    return list(counts.items())


def sharp_decomposition(spec: FormSpec) -> list[tuple[FormSpec, int]]:
    """Ожидаемое разложение sigma# на неразложимые с кратностями."""

    if spec.kind != "sharp":
        raise BadParams(f"sharp_decomposition expects a sharp form, got {spec.form}")
    rows = SHARP_DECOMPOSITIONS.get(spec.label)
    if rows is None:
        return [(spec, 1)]
    params = spec.param_map
    parts = [
        FormSpec.make(f"small:{label}", spec.p, {"e": params[name]} if name else None)
        for label, name in rows
    ]
    return _with_multiplicity(parts)


def small_decomposition(spec: FormSpec) -> list[tuple[FormSpec, int]]:
    """Разложение малого семейства: твист семейства переходит к скрученным слагаемым."""

    fam = SMALL_FAMILIES[spec.label]
    if fam.indecomposable:
        return [(spec, 1)]
    e = spec.param_map.get("e", 0)
    parts = [
        FormSpec.make(f"small:{label}", spec.p, {"e": e} if SMALL_FAMILIES[label].twisted else None)
        for label in fam.parts
    ]
    return _with_multiplicity(parts)
