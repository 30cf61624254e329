from __future__ import annotations

import dataclasses
from collections.abc import Mapping
from dataclasses import dataclass

from ..errors import BadCharacteristic, BadParams, UnknownForm
from ..field import MAX_P, is_prime
from ..linalg import PolyMat, polymat_det, polymat_frobenius, polymat_reduce, polymat_substitute
from ..symbolic import MPoly, sl2_reduce

KINDS = ("borel", "star", "sharp", "plus", "small")

ROMAN = (
    "I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX", "X", "XI", "XII", "XIII",
    "XIV", "XV", "XVI", "XVII", "XVIII", "XIX", "XX", "XXI", "XXII", "XXIII", "XXIV", "XXV", "XXVI",
)  # fmt: skip

EXTENDABLE_FORMS = ("I", "II", "IV", "V", "VII", "IX", "XI", "XV", "XIX", "XXI", "XXII", "XXIV", "XXVI")
SHARP_FORMS = ("I", "II", "IV", "V", "VII", "IX", "XI", "XV", "XIX", "XXIV", "XXVI")
PLUS_FORMS = SHARP_FORMS + ("XXI",)
SMALL_LABELS = ("1", "2.1", "2.2", "3.1a", "3.1b", "3.1c", "3.1d", "3.2a", "3.2b", "3.2c")

LABELS: dict[str, tuple[str, ...]] = {
    "borel": ROMAN,
    "star": EXTENDABLE_FORMS,
    "sharp": SHARP_FORMS,
    "plus": PLUS_FORMS,
    "small": SMALL_LABELS,
}

PARAM_NAMES = ("e", "e1", "e2", "e3", "e4", "f", "d1", "d2")
MAX_E = 3
MAX_D = 64

SL2_VARS = ("a", "b", "c", "d")


def block_vars(k: int) -> tuple[str, str, str, str]:
    """Переменные k-го блока (0-based) многоблочной формы: a1..d1, a2..d2, ..."""

    return tuple(f"{letter}{k + 1}" for letter in "abcd")  # type: ignore[return-value]


def parse_params(text: str | Mapping[str, int] | None) -> dict[str, int]:
    if text is None:
        return {}
    if isinstance(text, Mapping):
        return {str(k): int(v) for k, v in text.items()}
    out: dict[str, int] = {}
    for chunk in str(text).split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        key, sep, value = chunk.partition("=")
        key = key.strip()
        if not sep or not key:
            raise BadParams(f"params must look like e1=0,e2=1, got {chunk!r}")
        try:
            out[key] = int(value.strip())
        except ValueError:
            raise BadParams(f"param {key} must be an integer, got {value.strip()!r}") from None
    return out


def format_params(params: Mapping[str, int]) -> str:
    return ",".join(f"{k}={params[k]}" for k in sorted(params, key=_param_order))


def _param_order(name: str) -> tuple[int, str]:
    return (PARAM_NAMES.index(name) if name in PARAM_NAMES else len(PARAM_NAMES), name)


@dataclass(frozen=True)
class FormSpec:
    """Идентификатор формы каталога: вид, метка, параметры и характеристика."""

    kind: str
    label: str
    params: tuple[tuple[str, int], ...]
    p: int

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise UnknownForm(f"unknown form kind {self.kind!r}; expected one of {KINDS}")
        if self.label not in LABELS[self.kind]:
            raise UnknownForm(f"unknown {self.kind} form {self.label!r}")
        if not is_prime(self.p) or self.p > MAX_P:
            raise BadCharacteristic(f"p must be a prime <= {MAX_P}, got {self.p}")
        unknown = [k for k, _ in self.params if k not in PARAM_NAMES]
        if unknown:
            raise BadParams(f"unknown params {unknown}; known: {PARAM_NAMES}")
        for name, value in self.params:
            if value < 0:
                raise BadParams(f"{name} must be >= 0, got {value}")
            if name.startswith("e") or name == "f":
                if value > MAX_E:
                    raise BadParams(f"{name}={value} exceeds ceiling {MAX_E}")
            elif value > MAX_D:
                raise BadParams(f"{name}={value} exceeds ceiling {MAX_D}")

    @classmethod
    def make(cls, form: str, p: int, params: str | Mapping[str, int] | None = None) -> FormSpec:
        kind, sep, label = str(form).partition(":")
        if not sep:
            raise UnknownForm(f"form must look like borel:IX, got {form!r}")
        values = parse_params(params)
        return cls(kind=kind.strip(), label=label.strip(), params=tuple(sorted(values.items(), key=lambda kv: _param_order(kv[0]))), p=int(p))

    @property
    def family(self) -> str:
        if self.kind == "small":
            return "N" + self.label.replace(".", "_")
        return f"{self.kind.upper()}_{self.label}"

    @property
    def form(self) -> str:
        return f"{self.kind}:{self.label}"

    @property
    def param_map(self) -> dict[str, int]:
        return dict(self.params)

    @property
    def params_str(self) -> str:
        return format_params(self.param_map)

    def get(self, name: str, default: int | None = None) -> int | None:
        return self.param_map.get(name, default)

    def param(self, name: str) -> int:
        value = self.param_map.get(name)
        if value is None:
            raise BadParams(f"{self.form} requires param {name}")
        return value

    def with_params(self, **updates: int) -> FormSpec:
        merged = {**self.param_map, **updates}
        return FormSpec.make(self.form, self.p, merged)

    def __str__(self) -> str:
        return f"{self.form}[{self.params_str}]@p={self.p}" if self.params else f"{self.form}@p={self.p}"


@dataclass(frozen=True)
class GenDatum:
    """Гомоморфизм, заданный образами образующих: phi+(t), веса тора, phi-(s)."""

    p: int
    phi_plus: PolyMat
    weights: tuple[int, ...]
    phi_minus: PolyMat | None = None
    label: str = ""

    def __post_init__(self) -> None:
        n = len(self.weights)
        if len(self.phi_plus) != n or any(len(row) != n for row in self.phi_plus):
            raise ValueError(f"phi_plus must be {n}x{n}")
        if sum(self.weights) != 0:
            raise ValueError(f"weights must sum to 0, got {self.weights}")
        if not _is_identity_at_zero(self.phi_plus):
            raise ValueError("phi_plus(0) must be the identity")
        if self.phi_minus is not None:
            if len(self.phi_minus) != n or any(len(row) != n for row in self.phi_minus):
                raise ValueError(f"phi_minus must be {n}x{n}")
            if not _is_identity_at_zero(self.phi_minus):
                raise ValueError("phi_minus(0) must be the identity")

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def antisymmetric(self) -> bool:
        w = self.weights
        n = len(w)
        ordered = all(w[i] >= w[i + 1] for i in range(n - 1))
        return ordered and all(w[i] == -w[n - 1 - i] for i in range(n))

    def with_phi_minus(self, phi_minus: PolyMat | None) -> GenDatum:
        return dataclasses.replace(self, phi_minus=phi_minus)


def _is_identity_at_zero(mat: PolyMat) -> bool:
    for i, row in enumerate(mat):
        for j, f in enumerate(row):
            if f.constant_term() != (1 if i == j else 0):
                return False
    return True


@dataclass(frozen=True)
class ClosedFormRep:
    """Замкнутая форма sigma: элементы являются многочленами в нормальной форме.

    Блок k вычисляется на F^{twists[k]}(M). Однобложные формы используют
    переменные a, b, c, d; многоблочные используют a1..d1, a2..d2.
    """

    p: int
    entries: PolyMat
    twists: tuple[int, ...] = (0,)
    label: str = ""

    def __post_init__(self) -> None:
        n = len(self.entries)
        if any(len(row) != n for row in self.entries):
            raise ValueError("entries must be square")
        expected = self.block_names
        vars = self.entries[0][0].vars
        flat = tuple(v for block in expected for v in block)
        if vars != flat:
            raise ValueError(f"entry variables {vars} do not match blocks {expected}")
        if any(t < 0 for t in self.twists):
            raise ValueError(f"twists must be >= 0, got {self.twists}")

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def vars(self) -> tuple[str, ...]:
        return self.entries[0][0].vars

    @property
    def block_names(self) -> tuple[tuple[str, str, str, str], ...]:
        if len(self.twists) == 1:
            return (SL2_VARS,)
        return tuple(block_vars(k) for k in range(len(self.twists)))

    @property
    def max_degree(self) -> int:
        return max(f.degree() for row in self.entries for f in row)

    def untwisted(self) -> ClosedFormRep:
        return dataclasses.replace(self, twists=(0,) * len(self.twists))

    def expand(self) -> PolyMat:
        """Однобложная запись sigma(a,b,c,d) с примененными твистами, в нормальной форме."""

        if len(self.twists) == 1:
            return polymat_frobenius(self.entries, self.twists[0])
        mapping: dict[str, MPoly] = {}
        for block, e in zip(self.block_names, self.twists):
            for name, base in zip(block, SL2_VARS):
                mapping[name] = MPoly.monomial(self.p, SL2_VARS, 1, **{base: self.p**e})
        return polymat_reduce(polymat_substitute(self.entries, mapping))

    def determinant(self) -> MPoly:
        return sl2_reduce(polymat_det(self.entries))
