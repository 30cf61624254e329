"""Разреженные многочлены над F_p и нормальная форма по модулю ad - bc - 1.

MPoly хранит словарь {вектор показателей: коэффициент в 1..p-1}; нулевые
коэффициенты не хранятся, поэтому равные многочлены равны структурно.
Текстовый формат: `3*a^2*d + b*c` (ASCII, `^` для степени, `*` явный).
"""

from __future__ import annotations

import math
import re
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import CharMismatch, DegreeTooLarge, ParseError, UnboundVariable, VarMismatch, ZeroInverse
from .field import FieldCtx, FqElem

MAX_DEGREE = 64

Exps = tuple[int, ...]


class MPoly:
    __slots__ = ("p", "vars", "terms")

    def __init__(self, p: int, vars: Sequence[str], terms: Mapping[Exps, int] | None = None) -> None:
        self.p = int(p)
        self.vars: tuple[str, ...] = tuple(vars)
        if len(set(self.vars)) != len(self.vars):
            raise VarMismatch(f"duplicate variable names: {self.vars}")
        clean: dict[Exps, int] = {}
        for exps, coef in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != len(self.vars):
                raise VarMismatch(f"exponent vector {exps} does not match vars {self.vars}")
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            c = int(coef) % self.p
            if c:
                clean[exps] = c
        self.terms: dict[Exps, int] = clean

    # --- constructors ---------------------------------------------------------
    @classmethod
    def zero(cls, p: int, vars: Sequence[str]) -> MPoly:
        return cls(p, vars)

    @classmethod
    def const(cls, p: int, vars: Sequence[str], value: int | Fraction) -> MPoly:
        return cls(p, vars, {(0,) * len(tuple(vars)): _coef(value, p)})

    @classmethod
    def var(cls, p: int, vars: Sequence[str], name: str) -> MPoly:
        vars = tuple(vars)
        if name not in vars:
            raise VarMismatch(f"unknown variable {name!r}; vars={vars}")
        exps = tuple(1 if v == name else 0 for v in vars)
        return cls(p, vars, {exps: 1})

    @classmethod
    def monomial(cls, p: int, vars: Sequence[str], coef: int | Fraction, **powers: int) -> MPoly:
        vars = tuple(vars)
        unknown = set(powers) - set(vars)
        if unknown:
            raise VarMismatch(f"unknown variables {sorted(unknown)}; vars={vars}")
        exps = tuple(int(powers.get(v, 0)) for v in vars)
        return cls(p, vars, {exps: _coef(coef, p)})

    # --- inspection -----------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(exps) for exps in self.terms)

    def constant_term(self) -> int:
        return self.terms.get((0,) * len(self.vars), 0)

    def degree(self, var: str | None = None) -> int:
        if not self.terms:
            return -1
        if var is None:
            return max(sum(exps) for exps in self.terms)
        i = self._index(var)
        return max(exps[i] for exps in self.terms)

    def used_vars(self) -> tuple[str, ...]:
        return tuple(v for i, v in enumerate(self.vars) if any(exps[i] for exps in self.terms))

    def _index(self, var: str) -> int:
        try:
            return self.vars.index(var)
        except ValueError:
            raise VarMismatch(f"unknown variable {var!r}; vars={self.vars}") from None

    # --- protocol -------------------------------------------------------------
    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            return self == MPoly.const(self.p, self.vars, other)
        if not isinstance(other, MPoly):
            return NotImplemented
        return self.p == other.p and self.vars == other.vars and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.p, self.vars, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        return f"MPoly(p={self.p}, {format_poly(self)!r})"

    def __str__(self) -> str:
        return format_poly(self)

    def _lift(self, other: MPoly | int | Fraction) -> MPoly:
        if isinstance(other, MPoly):
            return other
        return MPoly.const(self.p, self.vars, other)

    def __add__(self, other: MPoly | int | Fraction) -> MPoly:
        return mp_add(self, self._lift(other))

    __radd__ = __add__

    def __sub__(self, other: MPoly | int | Fraction) -> MPoly:
        return mp_sub(self, self._lift(other))

    def __rsub__(self, other: MPoly | int | Fraction) -> MPoly:
        return mp_sub(self._lift(other), self)

    def __neg__(self) -> MPoly:
        return mp_scale(self, -1)

    def __mul__(self, other: MPoly | int | Fraction) -> MPoly:
        if isinstance(other, MPoly):
            return mp_mul(self, other)
        return mp_scale(self, other)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> MPoly:
        return mp_pow(self, n)


def _coef(value: int | Fraction, p: int) -> int:
    if isinstance(value, Fraction):
        if value.denominator % p == 0:
            raise ZeroInverse(f"denominator {value.denominator} vanishes in characteristic {p}")
        return (value.numerator * pow(value.denominator, -1, p)) % p
    return int(value) % p


def _check_compatible(f: MPoly, g: MPoly) -> None:
    if f.p != g.p:
        raise CharMismatch(f"characteristics differ: {f.p} vs {g.p}")
    if f.vars != g.vars:
        raise VarMismatch(f"variable lists differ: {f.vars} vs {g.vars}")


def _guard_degree(exps: Exps) -> Exps:
    if sum(exps) > MAX_DEGREE:
        raise DegreeTooLarge(f"total degree {sum(exps)} exceeds cap {MAX_DEGREE}")
    return exps


def mp_add(f: MPoly, g: MPoly) -> MPoly:
    _check_compatible(f, g)
    out = dict(f.terms)
    for exps, c in g.terms.items():
        out[exps] = (out.get(exps, 0) + c) % f.p
    return MPoly(f.p, f.vars, out)


def mp_scale(f: MPoly, k: int | Fraction) -> MPoly:
    c = _coef(k, f.p)
    return MPoly(f.p, f.vars, {exps: v * c for exps, v in f.terms.items()})


def mp_sub(f: MPoly, g: MPoly) -> MPoly:
    return mp_add(f, mp_scale(g, -1))


def mp_mul(f: MPoly, g: MPoly) -> MPoly:
    _check_compatible(f, g)
    out: dict[Exps, int] = {}
    for e1, c1 in f.terms.items():
        for e2, c2 in g.terms.items():
            exps = _guard_degree(tuple(x + y for x, y in zip(e1, e2)))
            out[exps] = (out.get(exps, 0) + c1 * c2) % f.p
    return MPoly(f.p, f.vars, out)


def mp_pow(f: MPoly, n: int) -> MPoly:
    if n < 0:
        raise ValueError(f"negative power {n} of a polynomial")
    result = MPoly.const(f.p, f.vars, 1)
    base = f
    while n:
        if n & 1:
            result = mp_mul(result, base)
        n >>= 1
        if n:
            base = mp_mul(base, base)
    return result


def mp_sum(polys: Iterable[MPoly], p: int, vars: Sequence[str]) -> MPoly:
    out = MPoly.zero(p, vars)
    for f in polys:
        out = mp_add(out, f)
    return out


# --- coordinate ring of SL2 ------------------------------------------------------
@dataclass(frozen=True)
class RewriteSystem:
    """По одному правилу a_k*d_k -> b_k*c_k + 1 на каждый блок (a_k, b_k, c_k, d_k)."""

    vars: tuple[str, ...]
    blocks: tuple[tuple[int, int, int, int], ...]

    @classmethod
    def for_vars(cls, vars: Sequence[str]) -> RewriteSystem:
        vars = tuple(vars)
        blocks: list[tuple[int, int, int, int]] = []
        suffixes = [""] + [str(k) for k in range(1, 9)]
        for suffix in suffixes:
            names = [f"{letter}{suffix}" for letter in "abcd"]
            if all(name in vars for name in names):
                blocks.append(tuple(vars.index(name) for name in names))  # type: ignore[arg-type]
        return cls(vars=vars, blocks=tuple(blocks))

    @property
    def rules(self) -> tuple[str, ...]:
        out = []
        for ia, ib, ic, id_ in self.blocks:
            a, b, c, d = (self.vars[i] for i in (ia, ib, ic, id_))
            out.append(f"{a}*{d} -> {b}*{c} + 1")
        return tuple(out)


def sl2_reduce(f: MPoly, rs: RewriteSystem | None = None) -> MPoly:
    rs = rs or RewriteSystem.for_vars(f.vars)
    if rs.vars != f.vars:
        raise VarMismatch(f"rewrite system vars {rs.vars} differ from {f.vars}")
    terms = dict(f.terms)
    for ia, ib, ic, id_ in rs.blocks:
        out: dict[Exps, int] = {}
        for exps, coef in terms.items():
            k = min(exps[ia], exps[id_])
            if k == 0:
                out[exps] = (out.get(exps, 0) + coef) % f.p
                continue
            # a^k d^k = (bc + 1)^k
            for j in range(k + 1):
                new = list(exps)
                new[ia] -= k
                new[id_] -= k
                new[ib] += j
                new[ic] += j
                key = tuple(new)
                out[key] = (out.get(key, 0) + coef * math.comb(k, j)) % f.p
        terms = out
    return MPoly(f.p, f.vars, terms)


def is_normal_form(f: MPoly, rs: RewriteSystem | None = None) -> bool:
    rs = rs or RewriteSystem.for_vars(f.vars)
    return all(not (exps[ia] and exps[id_]) for exps in f.terms for ia, _, _, id_ in rs.blocks)


# --- evaluation ------------------------------------------------------------------
def mp_eval(f: MPoly, point: Mapping[str, FqElem]) -> FqElem:
    ctx: FieldCtx | None = None
    for name in f.used_vars():
        if name not in point:
            raise UnboundVariable(f"variable {name!r} is not bound")
    for value in point.values():
        if value.ctx.p != f.p:
            raise CharMismatch(f"point lives in characteristic {value.ctx.p}, polynomial in {f.p}")
        if ctx is None:
            ctx = value.ctx
        elif value.ctx != ctx:
            raise CharMismatch(f"point mixes fields {ctx} and {value.ctx}")
    if ctx is None:
        raise UnboundVariable("cannot infer the field from an empty point")
    arrays = {name: point[name].code for name in f.used_vars()}
    return FqElem(ctx, int(eval_batch(f, ctx, arrays)))


def eval_batch(f: MPoly, ctx: FieldCtx, arrays: Mapping[str, np.ndarray | int]) -> np.ndarray:
    """Векторизованное значение f в точках: arrays[var] содержит коды одинаковой формы."""

    if ctx.p != f.p:
        raise CharMismatch(f"field characteristic {ctx.p} differs from polynomial characteristic {f.p}")
    used = f.used_vars()
    missing = [v for v in used if v not in arrays]
    if missing:
        raise UnboundVariable(f"variables {missing} are not bound")
    shape = np.broadcast_shapes(*(np.shape(arrays[v]) for v in used)) if used else ()
    if not used and arrays:
        shape = np.broadcast_shapes(*(np.shape(x) for x in arrays.values()))
    acc = np.zeros(shape, dtype=np.int64)
    cache: dict[tuple[int, int], np.ndarray] = {}
    for exps, coef in f.terms.items():
        term = np.full(shape, coef % ctx.p, dtype=np.int64)
        for i, e in enumerate(exps):
            if e:
                key = (i, e)
                if key not in cache:
                    cache[key] = ctx.pow(arrays[f.vars[i]], e)
                term = ctx.mul(term, cache[key])
        acc = ctx.add(acc, term)
    return acc


# --- structural maps -------------------------------------------------------------
def with_vars(f: MPoly, vars: Sequence[str]) -> MPoly:
    vars = tuple(vars)
    missing = [v for v in f.used_vars() if v not in vars]
    if missing:
        raise VarMismatch(f"variables {missing} are absent from {vars}")
    index = [vars.index(v) if v in vars else None for v in f.vars]
    out: dict[Exps, int] = {}
    for exps, coef in f.terms.items():
        new = [0] * len(vars)
        for i, e in enumerate(exps):
            if e:
                new[index[i]] = e  # type: ignore[index]
        out[tuple(new)] = coef
    return MPoly(f.p, vars, out)


def rename(f: MPoly, mapping: Mapping[str, str]) -> MPoly:
    return MPoly(f.p, tuple(mapping.get(v, v) for v in f.vars), f.terms)


def substitute(f: MPoly, mapping: Mapping[str, MPoly]) -> MPoly:
    if not mapping:
        return f
    sample = next(iter(mapping.values()))
    p, vars = sample.p, sample.vars
    images: list[MPoly] = []
    for name in f.vars:
        if name in mapping:
            image = mapping[name]
            _check_compatible(image, sample)
        elif name in vars:
            image = MPoly.var(p, vars, name)
        elif name in f.used_vars():
            raise VarMismatch(f"no image for variable {name!r} in {vars}")
        else:
            image = MPoly.zero(p, vars)
        images.append(image)
    out = MPoly.zero(p, vars)
    for exps, coef in f.terms.items():
        term = MPoly.const(p, vars, coef)
        for image, e in zip(images, exps):
            if e:
                term = mp_mul(term, mp_pow(image, e))
        out = mp_add(out, term)
    return out


def frobenius(f: MPoly, e: int) -> MPoly:
    """Сдвиг показателей на p^e; точно, так как коэффициенты лежат в F_p."""

    if e == 0:
        return f
    scale = f.p**e
    return MPoly(f.p, f.vars, {_guard_degree(tuple(x * scale for x in exps)): c for exps, c in f.terms.items()})


# --- text format -----------------------------------------------------------------
def _term_key(exps: Exps) -> tuple[int, tuple[int, ...]]:
    return (-sum(exps), tuple(-x for x in exps))


def format_poly(f: MPoly) -> str:
    if not f.terms:
        return "0"
    parts: list[str] = []
    for exps in sorted(f.terms, key=_term_key):
        coef = f.terms[exps]
        factors = [v if e == 1 else f"{v}^{e}" for v, e in zip(f.vars, exps) if e]
        if not factors:
            parts.append(str(coef))
        elif coef == 1:
            parts.append("*".join(factors))
        else:
            parts.append("*".join([str(coef), *factors]))
    return " + ".join(parts)


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(.))")


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens: list[tuple[str, str]] = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if match is None:
            break
        number, name, other = match.groups()
        if number is not None:
            tokens.append(("num", number))
        elif name is not None:
            tokens.append(("name", name))
        elif other is not None and other.strip():
            if other not in "+-*^/()":
                raise ParseError(f"unexpected character {other!r} at offset {match.start(3)}")
            tokens.append(("op", other))
        pos = match.end()
    return tokens


class _Parser:
    def __init__(self, tokens: list[tuple[str, str]], p: int, vars: tuple[str, ...]) -> None:
        self.tokens = tokens
        self.i = 0
        self.p = p
        self.vars = vars

    def peek(self) -> tuple[str, str] | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self, kind: str, value: str | None = None) -> str:
        tok = self.peek()
        if tok is None or tok[0] != kind or (value is not None and tok[1] != value):
            raise ParseError(f"expected {value or kind} at token {self.i}, got {tok}")
        self.i += 1
        return tok[1]

    def expr(self) -> MPoly:
        out = self.term()
        while (tok := self.peek()) is not None and tok in (("op", "+"), ("op", "-")):
            self.i += 1
            rhs = self.term()
            out = mp_add(out, rhs) if tok[1] == "+" else mp_sub(out, rhs)
        return out

    def term(self) -> MPoly:
        out = self.unary()
        while self.peek() == ("op", "*"):
            self.i += 1
            out = mp_mul(out, self.unary())
        return out

    def unary(self) -> MPoly:
        if self.peek() == ("op", "-"):
            self.i += 1
            return mp_scale(self.unary(), -1)
        return self.power()

    def power(self) -> MPoly:
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.i += 1
            return mp_pow(base, int(self.take("num")))
        return base

    def atom(self) -> MPoly:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input")
        kind, value = tok
        if kind == "num":
            self.i += 1
            num = int(value)
            if self.peek() == ("op", "/"):
                self.i += 1
                den = int(self.take("num"))
                try:
                    return MPoly.const(self.p, self.vars, Fraction(num, den))
                except (ZeroDivisionError, ZeroInverse) as exc:
                    raise ParseError(f"literal {num}/{den} is undefined in characteristic {self.p}") from exc
            return MPoly.const(self.p, self.vars, num)
        if kind == "name":
            self.i += 1
            if value not in self.vars:
                raise ParseError(f"unknown variable {value!r}; vars={self.vars}")
            return MPoly.var(self.p, self.vars, value)
        if tok == ("op", "("):
            self.i += 1
            out = self.expr()
            self.take("op", ")")
            return out
        raise ParseError(f"unexpected token {tok} at {self.i}")


def parse_poly(text: str, p: int, vars: Sequence[str] | None = None) -> MPoly:
    tokens = _tokenize(text)
    if vars is None:
        seen: list[str] = []
        for kind, value in tokens:
            if kind == "name" and value not in seen:
                seen.append(value)
        vars = seen
    parser = _Parser(tokens, p, tuple(vars))
    out = parser.expr()
    if parser.peek() is not None:
        raise ParseError(f"trailing input at token {parser.i}: {parser.peek()}")
    return out
