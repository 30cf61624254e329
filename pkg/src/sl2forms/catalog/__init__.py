"""Замкнутый каталог форм: борелевские пары, sigma*, sigma+, sigma#, малые семейства."""

from __future__ import annotations

from itertools import product

from ..errors import BadCharacteristic, BadParams
from .borel import (
    BOREL_TABLE,
    borel_weights,
    build_borel_pair,
    extended_datum,
    extension_constraints,
    partition_class,
    phi_minus_closed_form,
    validate_borel,
)
from .closed_forms import (
    CHAR_RULES,
    SHARP_PARAMS,
    STAR_FIXED_DIMS,
    assemble_triple,
    build_plus,
    build_sharp,
    build_star,
    check_char,
    star_borel_spec,
)
from .conjugators import CONJUGATORS, ConjugatorRow, conjugator_for, conjugator_row
from .contracts import (
    EXTENDABLE_FORMS,
    PLUS_FORMS,
    ROMAN,
    SHARP_FORMS,
    SL2_VARS,
    SMALL_LABELS,
    ClosedFormRep,
    FormSpec,
    GenDatum,
    block_vars,
    parse_params,
)
from .small import (
    SHARP_DECOMPOSITIONS,
    SMALL_FAMILIES,
    build_small,
    sharp_decomposition,
    small_applies,
    small_decomposition,
)

__all__ = [
    "BOREL_TABLE",
    "CONJUGATORS",
    "EXTENDABLE_FORMS",
    "PLUS_FORMS",
    "ROMAN",
    "SHARP_DECOMPOSITIONS",
    "SHARP_FORMS",
    "SL2_VARS",
    "SMALL_FAMILIES",
    "SMALL_LABELS",
    "STAR_FIXED_DIMS",
    "ClosedFormRep",
    "ConjugatorRow",
    "FormSpec",
    "GenDatum",
    "assemble_triple",
    "block_vars",
    "borel_catalog",
    "borel_weights",
    "build_borel_pair",
    "build_sigma",
    "conjugator_for",
    "conjugator_row",
    "conjugator_target",
    "extended_datum",
    "extension_constraints",
    "parse_params",
    "partition_class",
    "phi_minus_closed_form",
    "sharp_admissible",
    "sharp_catalog",
    "sharp_decomposition",
    "small_catalog",
    "small_decomposition",
    "star_borel_spec",
    "star_catalog",
]


def build_sigma(spec: FormSpec) -> ClosedFormRep:
    if spec.kind == "star":
        return build_star(spec)
    if spec.kind == "sharp":
        return build_sharp(spec)
    if spec.kind == "plus":
        return build_plus(spec)
    if spec.kind == "small":
        return build_small(spec)
    raise BadParams(f"build_sigma expects a star/sharp/plus/small form, got {spec.form}")


def sharp_admissible(label: str, p: int) -> bool:
    try:
        check_char(label, p, "sharp")
    except BadCharacteristic:
        return False
    return True


def _e_grid(label: str, e_max: int) -> list[dict[str, int]]:
    names = SHARP_PARAMS[label]
    if label == "IV":
        return [{"e1": e1, "e2": e2} for e2 in range(e_max + 1) for e1 in range(e2)]
    if label == "XV":
        return [{"e2": e2, "e3": e3} for e2 in range(e_max + 1) for e3 in range(e2 + 1)]
    if not names:
        return [{}]
    (name,) = names
    return [{name: e} for e in range(e_max + 1)]


def sharp_catalog(p: int, e_max: int) -> list[FormSpec]:
    """Все sigma# при данной характеристике с показателями <= e_max."""

    out: list[FormSpec] = []
    for label in SHARP_FORMS:
        if not sharp_admissible(label, p):
            continue
        for params in _e_grid(label, e_max):
            out.append(FormSpec.make(f"sharp:{label}", p, params))
    return out


def small_catalog(p: int, e_max: int, dim: int | None = None) -> list[FormSpec]:
    out: list[FormSpec] = []
    for label, fam in SMALL_FAMILIES.items():
        if not small_applies(label, p) or (dim is not None and fam.dim != dim):
            continue
        grid = [{"e": e} for e in range(e_max + 1)] if fam.twisted else [{}]
        out.extend(FormSpec.make(f"small:{label}", p, params) for params in grid)
    return out


def conjugator_target(row: ConjugatorRow, source: FormSpec) -> tuple[FormSpec, int]:
    """Целевая форма и показатель Фробениуса, с которыми Inn_P o source совпадает."""

    params = source.param_map
    twist = 0
    if row.twist is not None:
        if row.twist not in params:
            raise BadParams(f"{source.form} needs {row.twist} for lemma {row.key}")
        twist = params[row.twist]
    kind, _, label = row.target.partition(":")
    if row.target_params == "none":
        target_params: dict[str, int] = {}
    elif row.target_params == "xv_from_e1":
        e1 = params.get("e1", 0)
        target_params = {"e2": e1, "e3": e1}
    elif kind == "sharp":
        target_params = {k: params[k] for k in SHARP_PARAMS[label] if k in params}
    else:
        target_params = {k: v for k, v in params.items() if k.startswith("e")}
        if label == "V":
            target_params = {"e1": params.get("e1", 0)}
    return FormSpec.make(row.target, source.p, target_params), twist


# Параметры, которые продолжение задает само: f = e1 + 1, e3 = e1 + 1, d по star_borel_spec.
_FORCED = {"V": ("f",), "XI": ("e3",), "XIX": ("e3",)}


def _exponent_names(label: str) -> list[str]:
    return [name for name in BOREL_TABLE[label].params if name[0] in "ef"]


def _valid_borel(label: str, p: int, params: dict[str, int]) -> FormSpec | None:
    try:
        spec = FormSpec.make(f"borel:{label}", p, params)
        validate_borel(spec)
    except (BadParams, BadCharacteristic):
        return None
    return spec


def borel_catalog(p: int, e_max: int) -> list[FormSpec]:
    """Борелевские формы при данной p: показатели <= e_max (f <= e_max + 1),
    свободные d берутся как минимальное и максимальное допустимые значения из 0..2p^e_max."""

    d_ceiling = 2 * p**e_max
    out: list[FormSpec] = []
    for label, row in BOREL_TABLE.items():
        e_names = _exponent_names(label)
        d_names = [name for name in row.params if name not in e_names]
        ranges = [range(e_max + 2) if name == "f" else range(e_max + 1) for name in e_names]
        for e_values in product(*ranges):
            exps = dict(zip(e_names, e_values))
            legal = [
                spec
                for d_values in product(range(d_ceiling + 1), repeat=len(d_names))
                if (spec := _valid_borel(label, p, {**exps, **dict(zip(d_names, d_values))})) is not None
            ]
            if not legal:
                continue
            if not d_names:
                out.extend(legal)
                continue
            ends = [legal[0], legal[-1]]
            out.extend(dict.fromkeys(ends))
    return out


def star_catalog(p: int, e_max: int) -> list[FormSpec]:
    """Все sigma* при данной p с показателями <= e_max; вынужденные параметры не задаются."""

    out: list[FormSpec] = []
    for label in EXTENDABLE_FORMS:
        free = [name for name in _exponent_names(label) if name not in _FORCED.get(label, ())]
        for values in product(range(e_max + 1), repeat=len(free)):
            spec = FormSpec.make(f"star:{label}", p, dict(zip(free, values)))
            try:
                star_borel_spec(spec)
            except (BadParams, BadCharacteristic):
                continue
            out.append(spec)
    return out
