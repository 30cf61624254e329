"""Точная арифметика в F_p и F_{p^m}.

Элемент поля кодируется целым 0..q-1: цифры кода в системе счисления по
основанию p суть коэффициенты многочлена от корня модуля (little-endian).
Умножение идет через таблицы exp/log относительно фиксированного
примитивного элемента `gen`, сложение через поцифровое сложение mod p.
Все операции векторизованы по numpy-массивам кодов.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product

import numpy as np

from .errors import BadModulus, BudgetExceeded, CharMismatch, ZeroInverse

DEFAULT_ENUM_BUDGET = 10**6
MAX_P = 31
MAX_M = 4

# Встроенные модули; для остальных (p, m) берется первый неприводимый.
BUILTIN_MODULI: dict[tuple[int, int], tuple[int, ...]] = {
    (2, 2): (1, 1, 1),
    (3, 2): (1, 0, 1),
    (5, 2): (2, 0, 1),
}


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def _prime_factors(n: int) -> list[int]:
    out: list[int] = []
    i = 2
    while i * i <= n:
        if n % i == 0:
            out.append(i)
            while n % i == 0:
                n //= i
        i += 1
    if n > 1:
        out.append(n)
    return out


def _poly_trim(coeffs: Sequence[int]) -> list[int]:
    out = list(coeffs)
    while out and out[-1] == 0:
        out.pop()
    return out


def _poly_rem(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    rem = _poly_trim([c % p for c in a])
    div = _poly_trim([c % p for c in b])
    inv_lead = pow(div[-1], -1, p)
    while len(rem) >= len(div):
        factor = (rem[-1] * inv_lead) % p
        shift = len(rem) - len(div)
        for i, c in enumerate(div):
            rem[shift + i] = (rem[shift + i] - factor * c) % p
        rem = _poly_trim(rem)
    return rem


def _poly_mulmod(a: Sequence[int], b: Sequence[int], modulus: Sequence[int], p: int) -> list[int]:
    if not a or not b:
        return []
    prod = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod[i + j] = (prod[i + j] + x * y) % p
    return _poly_rem(prod, modulus, p)


def _poly_powmod(a: Sequence[int], n: int, modulus: Sequence[int], p: int) -> list[int]:
    result: list[int] = [1]
    base = list(a)
    while n:
        if n & 1:
            result = _poly_mulmod(result, base, modulus, p)
        base = _poly_mulmod(base, base, modulus, p)
        n >>= 1
    return result


def is_irreducible(modulus: Sequence[int], p: int) -> bool:
    """Неприводимость монического многочлена степени m <= 4 над F_p."""

    coeffs = [int(c) % p for c in modulus]
    m = len(coeffs) - 1
    if m < 1 or coeffs[-1] != 1:
        return False
    if m == 1:
        return True
    for x in range(p):
        if sum(c * pow(x, i, p) for i, c in enumerate(coeffs)) % p == 0:
            return False
    if m <= 3:
        return True
    if m > MAX_M:
        raise BadModulus(f"irreducibility test supports degree <= {MAX_M}, got {m}")
    for c0, c1 in product(range(p), repeat=2):
        if not _poly_rem(coeffs, [c0, c1, 1], p):
            return False
    return True


def find_modulus(p: int, m: int) -> tuple[int, ...] | None:
    if m == 1:
        return None
    builtin = BUILTIN_MODULI.get((p, m))
    if builtin is not None:
        return builtin
    for low in product(range(p), repeat=m):
        candidate = (*low, 1)
        if candidate[0] != 0 and is_irreducible(candidate, p):
            return candidate
    raise BadModulus(f"no irreducible polynomial of degree {m} over F_{p}")


class FieldCtx:
    """Конечное поле F_q, q = p^m; неизменяемо после построения."""

    def __init__(self, p: int, m: int = 1, modulus: Sequence[int] | None = None) -> None:
        if not is_prime(p) or p > MAX_P:
            raise BadModulus(f"p must be a prime <= {MAX_P}, got {p}")
        if not 1 <= m <= MAX_M:
            raise BadModulus(f"extension degree must be in 1..{MAX_M}, got {m}")
        if m == 1:
            if modulus is not None:
                raise BadModulus("modulus is only allowed for m > 1")
            self.modulus: tuple[int, ...] | None = None
        else:
            raw = modulus if modulus is not None else find_modulus(p, m)
            mod = tuple(int(c) % p for c in raw or ())
            if len(mod) != m + 1 or mod[-1] != 1:
                raise BadModulus(f"modulus must be monic of degree {m}: {tuple(raw or ())}")
            if not is_irreducible(mod, p):
                raise BadModulus(f"modulus {mod} is reducible over F_{p}")
            self.modulus = mod

        self.p = p
        self.m = m
        self.q = p**m
        self._powers = p ** np.arange(m, dtype=np.int64)
        codes = np.arange(self.q, dtype=np.int64)
        self._digits = (codes[:, None] // self._powers[None, :]) % p
        self.gen, exp = self._primitive_powers()
        self._exp = exp
        self._log = np.full(self.q, -1, dtype=np.int64)
        self._log[exp] = np.arange(self.q - 1, dtype=np.int64)
        for arr in (self._powers, self._digits, self._exp, self._log):
            arr.setflags(write=False)

    # --- construction helpers -------------------------------------------------
    def _to_coeffs(self, code: int) -> list[int]:
        return _poly_trim(int(d) for d in self._digits[code])

    def _from_coeffs(self, coeffs: Sequence[int]) -> int:
        return int(sum((int(c) % self.p) * self.p**i for i, c in enumerate(coeffs)))

    def _primitive_powers(self) -> tuple[int, np.ndarray]:
        order = self.q - 1
        factors = _prime_factors(order)
        if self.m == 1:
            for g in range(1, self.p):
                if all(pow(g, order // r, self.p) != 1 for r in factors):
                    exp = [pow(g, k, self.p) for k in range(order)]
                    return g, np.asarray(exp, dtype=np.int64)
            raise BadModulus(f"no primitive root modulo {self.p}")

        assert self.modulus is not None
        for g in range(2, self.q):
            coeffs = self._to_coeffs(g)
            if all(_poly_powmod(coeffs, order // r, self.modulus, self.p) != [1] for r in factors):
                exp = np.empty(order, dtype=np.int64)
                cur: list[int] = [1]
                for k in range(order):
                    exp[k] = self._from_coeffs(cur)
                    cur = _poly_mulmod(cur, coeffs, self.modulus, self.p)
                return g, exp
        raise BadModulus(f"no primitive element in F_{self.q}")

    # --- identity -------------------------------------------------------------
    @property
    def key(self) -> tuple[int, int, tuple[int, ...] | None]:
        return (self.p, self.m, self.modulus)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FieldCtx) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        if self.m == 1:
            return f"FieldCtx(F_{self.p})"
        return f"FieldCtx(F_{self.q}, modulus={self.modulus})"

    # --- elements -------------------------------------------------------------
    def elements(self) -> np.ndarray:
        return np.arange(self.q, dtype=np.int64)

    def nonzero(self) -> np.ndarray:
        return np.arange(1, self.q, dtype=np.int64)

    def element(self, code: int) -> FqElem:
        return FqElem(self, int(code))

    def coeffs(self, code: int) -> tuple[int, ...]:
        return tuple(int(d) for d in self._digits[int(code)])

    def digits(self, x: np.ndarray | int) -> np.ndarray:
        """Цифры (координаты над F_p) кодов: форма (..., m)."""

        return self._digits[np.asarray(x, dtype=np.int64)]

    def scalar(self, value: int | Fraction) -> int:
        """Код образа целого или дроби из F_p."""

        if isinstance(value, Fraction):
            if value.denominator % self.p == 0:
                raise ZeroInverse(f"denominator {value.denominator} vanishes in characteristic {self.p}")
            return (value.numerator * pow(value.denominator, -1, self.p)) % self.p
        return int(value) % self.p

    def extension(self, k: int) -> FieldCtx:
        return get_field(self.p, self.m * k)

    # --- arithmetic -----------------------------------------------------------
    @staticmethod
    def _arr(x: np.ndarray | int) -> np.ndarray:
        return np.asarray(x, dtype=np.int64)

    def add(self, x: np.ndarray | int, y: np.ndarray | int) -> np.ndarray:
        x, y = self._arr(x), self._arr(y)
        if self.m == 1:
            return (x + y) % self.p
        return ((self._digits[x] + self._digits[y]) % self.p) @ self._powers

    def neg(self, x: np.ndarray | int) -> np.ndarray:
        x = self._arr(x)
        if self.m == 1:
            return (-x) % self.p
        return ((-self._digits[x]) % self.p) @ self._powers

    def sub(self, x: np.ndarray | int, y: np.ndarray | int) -> np.ndarray:
        x, y = self._arr(x), self._arr(y)
        if self.m == 1:
            return (x - y) % self.p
        return ((self._digits[x] - self._digits[y]) % self.p) @ self._powers

    def mul(self, x: np.ndarray | int, y: np.ndarray | int) -> np.ndarray:
        x, y = self._arr(x), self._arr(y)
        if self.m == 1:
            return (x * y) % self.p
        out = self._exp[(self._log[x] + self._log[y]) % (self.q - 1)]
        return np.where((x == 0) | (y == 0), 0, out)

    def inv(self, x: np.ndarray | int) -> np.ndarray:
        x = self._arr(x)
        if np.any(x == 0):
            raise ZeroInverse(f"zero has no inverse in F_{self.q}")
        return self._exp[(-self._log[x]) % (self.q - 1)]

    def div(self, x: np.ndarray | int, y: np.ndarray | int) -> np.ndarray:
        return self.mul(x, self.inv(y))

    def pow(self, x: np.ndarray | int, n: int) -> np.ndarray:
        x = self._arr(x)
        n = int(n)
        if n == 0:
            return np.ones_like(x)
        zero = x == 0
        if n < 0 and np.any(zero):
            raise ZeroInverse(f"zero raised to negative power {n} in F_{self.q}")
        k = n % (self.q - 1)
        out = self._exp[(self._log[x] * k) % (self.q - 1)]
        return np.where(zero, 0, out)

    def frob(self, x: np.ndarray | int, e: int) -> np.ndarray:
        """Фробениус F^e: x -> x^{p^e}."""

        if e == 0:
            return self._arr(x)
        return self.pow(x, self.p**e)


@lru_cache(maxsize=64)
def get_field(p: int, m: int = 1) -> FieldCtx:
    return FieldCtx(p, m)


@dataclass(frozen=True)
class FqElem:
    ctx: FieldCtx
    code: int

    def __post_init__(self) -> None:
        if not 0 <= int(self.code) < self.ctx.q:
            raise ValueError(f"code {self.code} is out of range for F_{self.ctx.q}")
        object.__setattr__(self, "code", int(self.code))

    @property
    def coeffs(self) -> tuple[int, ...]:
        return self.ctx.coeffs(self.code)

    def _other(self, other: FqElem | int) -> int:
        if isinstance(other, FqElem):
            if other.ctx != self.ctx:
                raise CharMismatch(f"cannot combine elements of {self.ctx} and {other.ctx}")
            return other.code
        return self.ctx.scalar(other)

    def _wrap(self, code: np.ndarray | int) -> FqElem:
        return FqElem(self.ctx, int(code))

    def __add__(self, other: FqElem | int) -> FqElem:
        return self._wrap(self.ctx.add(self.code, self._other(other)))

    __radd__ = __add__

    def __sub__(self, other: FqElem | int) -> FqElem:
        return self._wrap(self.ctx.sub(self.code, self._other(other)))

    def __rsub__(self, other: FqElem | int) -> FqElem:
        return self._wrap(self.ctx.sub(self._other(other), self.code))

    def __neg__(self) -> FqElem:
        return self._wrap(self.ctx.neg(self.code))

    def __mul__(self, other: FqElem | int) -> FqElem:
        return self._wrap(self.ctx.mul(self.code, self._other(other)))

    __rmul__ = __mul__

    def __truediv__(self, other: FqElem | int) -> FqElem:
        return self._wrap(self.ctx.div(self.code, self._other(other)))

    def __pow__(self, n: int) -> FqElem:
        return fq_pow(self, n)

    def __bool__(self) -> bool:
        return self.code != 0

    def __repr__(self) -> str:
        return f"F{self.ctx.q}({self.code})"


def fq_inv(x: FqElem) -> FqElem:
    return FqElem(x.ctx, int(x.ctx.inv(x.code)))


def fq_pow(x: FqElem, n: int) -> FqElem:
    return FqElem(x.ctx, int(x.ctx.pow(x.code, n)))


# --- SL(2, F_q) ------------------------------------------------------------------
def sl2_key(ctx: FieldCtx, M: np.ndarray) -> np.ndarray:
    """Лексикографический ключ (a, b, c, d) для пакета матриц (..., 2, 2)."""

    q = ctx.q
    M = np.asarray(M, dtype=np.int64)
    return ((M[..., 0, 0] * q + M[..., 0, 1]) * q + M[..., 1, 0]) * q + M[..., 1, 1]


def sl2_order(q: int) -> int:
    return q * (q * q - 1)


def enumerate_sl2(ctx: FieldCtx, budget: int = DEFAULT_ENUM_BUDGET) -> np.ndarray:
    q = ctx.q
    if q**3 > budget:
        raise BudgetExceeded(f"q^3={q**3} exceeds enumeration budget {budget}")
    el = ctx.elements()

    a, b, c = (g.ravel() for g in np.meshgrid(el[1:], el, el, indexing="ij"))
    d = ctx.div(ctx.add(1, ctx.mul(b, c)), a)

    b0, d0 = (g.ravel() for g in np.meshgrid(el[1:], el, indexing="ij"))
    c0 = ctx.neg(ctx.inv(b0))
    a0 = np.zeros_like(b0)

    out = np.empty((a.size + a0.size, 2, 2), dtype=np.int64)
    out[:, 0, 0] = np.concatenate([a, a0])
    out[:, 0, 1] = np.concatenate([b, b0])
    out[:, 1, 0] = np.concatenate([c, c0])
    out[:, 1, 1] = np.concatenate([d, d0])
    return out[np.argsort(sl2_key(ctx, out), kind="stable")]


def random_sl2(ctx: FieldCtx, rng: np.random.Generator, size: int) -> np.ndarray:
    """Равномерная выборка из SL(2, F_q) без полного перечисления."""

    q = ctx.q
    n_main = (q - 1) * q * q
    idx = rng.integers(0, sl2_order(q), size=size)
    out = np.zeros((size, 2, 2), dtype=np.int64)

    main = idx < n_main
    k = idx[main]
    a = 1 + k // (q * q)
    b = (k // q) % q
    c = k % q
    out[main, 0, 0] = a
    out[main, 0, 1] = b
    out[main, 1, 0] = c
    out[main, 1, 1] = ctx.div(ctx.add(1, ctx.mul(b, c)), a)

    k = idx[~main] - n_main
    b0 = 1 + k // q
    out[~main, 0, 1] = b0
    out[~main, 1, 0] = ctx.neg(ctx.inv(b0))
    out[~main, 1, 1] = k % q
    return out


def upper(ctx: FieldCtx, t: np.ndarray | int) -> np.ndarray:
    t = np.asarray(t, dtype=np.int64)
    out = np.zeros(t.shape + (2, 2), dtype=np.int64)
    out[..., 0, 0] = 1
    out[..., 1, 1] = 1
    out[..., 0, 1] = t
    return out


def lower(ctx: FieldCtx, s: np.ndarray | int) -> np.ndarray:
    s = np.asarray(s, dtype=np.int64)
    out = np.zeros(s.shape + (2, 2), dtype=np.int64)
    out[..., 0, 0] = 1
    out[..., 1, 1] = 1
    out[..., 1, 0] = s
    return out


def torus(ctx: FieldCtx, u: np.ndarray | int) -> np.ndarray:
    u = np.asarray(u, dtype=np.int64)
    out = np.zeros(u.shape + (2, 2), dtype=np.int64)
    out[..., 0, 0] = u
    out[..., 1, 1] = ctx.inv(u)
    return out


def weyl(ctx: FieldCtx) -> np.ndarray:
    """w = (0, -1; 1, 0)."""

    return np.array([[0, int(ctx.neg(1))], [1, 0]], dtype=np.int64)
