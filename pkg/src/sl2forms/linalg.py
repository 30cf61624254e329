"""Плотные матрицы над F_q (numpy-массивы кодов) и над MPoly (кортежи кортежей).

Числовые операции принимают пакеты (..., n, k) и работают по последним двум осям.
Полиномиальные матрицы никогда не обращаются.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from itertools import permutations
from typing import Union

import numpy as np

from .errors import NotSquare, RingMismatch, SingularMatrix
from .field import FieldCtx
from .symbolic import MPoly, eval_batch, frobenius, mp_add, mp_mul, mp_scale, sl2_reduce, substitute, with_vars

PolyMat = tuple[tuple[MPoly, ...], ...]
AnyMat = Union[np.ndarray, PolyMat]

MAX_DIM = 16


def _as_codes(A: np.ndarray | Sequence) -> np.ndarray:
    return np.asarray(A, dtype=np.int64)


def is_polymat(A: object) -> bool:
    return isinstance(A, tuple) and bool(A) and isinstance(A[0], tuple) and isinstance(A[0][0], MPoly)


# --- constructors ----------------------------------------------------------------
def identity(n: int) -> np.ndarray:
    if not 1 <= n <= MAX_DIM:
        raise ValueError(f"n must be in 1..{MAX_DIM}, got {n}")
    return np.eye(n, dtype=np.int64)


def diag(values: Sequence[int] | np.ndarray) -> np.ndarray:
    """Диагональные матрицы; values формы (..., n) дают пакет (..., n, n)."""

    v = _as_codes(values)
    n = v.shape[-1]
    out = np.zeros(v.shape + (n,), dtype=np.int64)
    idx = np.arange(n)
    out[..., idx, idx] = v
    return out


def perm_swap(n: int, i: int, j: int) -> np.ndarray:
    """P_{i,j}: единичная матрица с переставленными строками i и j (1-based)."""

    if not (1 <= i <= n and 1 <= j <= n):
        raise ValueError(f"swap indices must be in 1..{n}, got ({i}, {j})")
    P = identity(n)
    P[[i - 1, j - 1]] = P[[j - 1, i - 1]]
    return P


def perm_matrix(pi: Sequence[int]) -> np.ndarray:
    """Матрица перестановки с P e_j = e_{pi(j)} (1-based)."""

    n = len(pi)
    if sorted(pi) != list(range(1, n + 1)):
        raise ValueError(f"not a permutation of 1..{n}: {tuple(pi)}")
    P = np.zeros((n, n), dtype=np.int64)
    for j, target in enumerate(pi):
        P[target - 1, j] = 1
    return P


# --- arithmetic ------------------------------------------------------------------
def mat_mul(ctx: FieldCtx, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    A, B = _as_codes(A), _as_codes(B)
    if A.shape[-1] != B.shape[-2]:
        raise ValueError(f"shape mismatch: {A.shape} @ {B.shape}")
    if ctx.m == 1:
        return np.matmul(A, B) % ctx.p
    out: np.ndarray | None = None
    for k in range(A.shape[-1]):
        term = ctx.mul(A[..., :, k : k + 1], B[..., k : k + 1, :])
        out = term if out is None else ctx.add(out, term)
    assert out is not None
    return out


def mat_chain(ctx: FieldCtx, *mats: np.ndarray) -> np.ndarray:
    out = mats[0]
    for M in mats[1:]:
        out = mat_mul(ctx, out, M)
    return _as_codes(out)


def mat_sub(ctx: FieldCtx, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return ctx.sub(A, B)


def rref(ctx: FieldCtx, A: np.ndarray) -> tuple[np.ndarray, tuple[int, ...]]:
    """Приведенный ступенчатый вид; ведущий элемент берется первым ненулевой в столбце."""

    R = _as_codes(A).copy()
    if R.ndim != 2:
        raise ValueError(f"rref expects a 2-d matrix, got shape {R.shape}")
    rows, cols = R.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(R[r:, c])
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            R[[r, k]] = R[[k, r]]
        R[r] = ctx.mul(R[r], ctx.inv(R[r, c]))
        factors = R[:, c].copy()
        factors[r] = 0
        mask = factors != 0
        if mask.any():
            R[mask] = ctx.sub(R[mask], ctx.mul(factors[mask][:, None], R[r][None, :]))
        pivots.append(c)
        r += 1
    return R, tuple(pivots)


def rank(ctx: FieldCtx, A: np.ndarray) -> int:
    return len(rref(ctx, A)[1])


def nullspace(ctx: FieldCtx, A: np.ndarray) -> np.ndarray:
    """Базис ядра {v : A v = 0}; строки результата образуют базис."""

    A = _as_codes(A)
    cols = A.shape[1]
    R, pivots = rref(ctx, A)
    free = [c for c in range(cols) if c not in pivots]
    basis = np.zeros((len(free), cols), dtype=np.int64)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for i, pc in enumerate(pivots):
            basis[k, pc] = ctx.neg(R[i, f])
    return basis


def nullspace_dim(ctx: FieldCtx, A: np.ndarray) -> tuple[int, np.ndarray]:
    basis = nullspace(ctx, A)
    return basis.shape[0], basis


def column_space(ctx: FieldCtx, A: np.ndarray) -> np.ndarray:
    """Независимые столбцы A (ведущие столбцы), как столбцы результата."""

    A = _as_codes(A)
    _, pivots = rref(ctx, A)
    return A[:, list(pivots)]


def det(ctx: FieldCtx, A: np.ndarray) -> int:
    R = _as_codes(A).copy()
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise NotSquare(f"det of non-square shape {R.shape}")
    n = R.shape[0]
    acc = 1
    for c in range(n):
        nz = np.flatnonzero(R[c:, c])
        if nz.size == 0:
            return 0
        k = c + int(nz[0])
        if k != c:
            R[[c, k]] = R[[k, c]]
            acc = int(ctx.neg(acc))
        pivot = R[c, c]
        acc = int(ctx.mul(acc, pivot))
        below = R[c + 1 :, c]
        mask = below != 0
        if mask.any():
            factors = ctx.div(below[mask], pivot)
            R[c + 1 :][mask] = ctx.sub(R[c + 1 :][mask], ctx.mul(factors[:, None], R[c][None, :]))
    return acc


def mat_inv(ctx: FieldCtx, A: np.ndarray) -> np.ndarray:
    A = _as_codes(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NotSquare(f"inverse of non-square shape {A.shape}")
    n = A.shape[0]
    R, pivots = rref(ctx, np.hstack([A, identity(n)]))
    if pivots[:n] != tuple(range(n)):
        raise SingularMatrix(f"matrix is singular over F_{ctx.q}")
    return R[:, n:]


def inn(ctx: FieldCtx, P: np.ndarray, A: np.ndarray) -> np.ndarray:
    """Inn_P(A) = P^{-1} A P, по пакету A."""

    P = _as_codes(P)
    return mat_mul(ctx, mat_mul(ctx, mat_inv(ctx, P), A), P)


# --- structural operations ---------------------------------------------------------
def tau_transpose(A: AnyMat) -> AnyMat:
    """(tau A)_{i,j} = A_{n-j+1, n-i+1}: отражение относительно побочной диагонали."""

    if is_polymat(A):
        n = len(A)  # type: ignore[arg-type]
        if any(len(row) != n for row in A):  # type: ignore[union-attr]
            raise NotSquare("tau_transpose expects a square matrix")
        return tuple(tuple(A[n - 1 - j][n - 1 - i] for j in range(n)) for i in range(n))  # type: ignore[index]
    A = _as_codes(A)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise NotSquare(f"tau_transpose expects square matrices, got shape {A.shape}")
    return np.swapaxes(A[..., ::-1, ::-1], -1, -2).copy()


def _check_rings(A: AnyMat, B: AnyMat) -> bool:
    pa, pb = is_polymat(A), is_polymat(B)
    if pa != pb:
        raise RingMismatch("cannot combine a polynomial matrix with a field matrix")
    if pa:
        fa, fb = A[0][0], B[0][0]  # type: ignore[index]
        if fa.p != fb.p or fa.vars != fb.vars:
            raise RingMismatch(f"polynomial rings differ: F_{fa.p}{list(fa.vars)} vs F_{fb.p}{list(fb.vars)}")
    return pa


def kron_product(A: AnyMat, B: AnyMat, ctx: FieldCtx | None = None) -> AnyMat:
    if _check_rings(A, B):
        return tuple(
            tuple(mp_mul(a, b) for a in row_a for b in row_b)
            for row_a in A  # type: ignore[union-attr]
            for row_b in B  # type: ignore[union-attr]
        )
    if ctx is None:
        raise RingMismatch("field matrices need a FieldCtx for kron_product")
    A, B = _as_codes(A), _as_codes(B)
    n, c = A.shape[-2:]
    r, s = B.shape[-2:]
    out = ctx.mul(A[..., :, None, :, None], B[..., None, :, None, :])
    return out.reshape(out.shape[:-4] + (n * r, c * s))


def direct_sum(A: AnyMat, B: AnyMat) -> AnyMat:
    if _check_rings(A, B):
        f = A[0][0]  # type: ignore[index]
        zero = MPoly.zero(f.p, f.vars)
        ca, cb = len(A[0]), len(B[0])  # type: ignore[index]
        top = tuple(tuple(row) + (zero,) * cb for row in A)  # type: ignore[union-attr]
        bottom = tuple((zero,) * ca + tuple(row) for row in B)  # type: ignore[union-attr]
        return top + bottom
    A, B = _as_codes(A), _as_codes(B)
    batch = np.broadcast_shapes(A.shape[:-2], B.shape[:-2])
    n, c = A.shape[-2:]
    r, s = B.shape[-2:]
    out = np.zeros(batch + (n + r, c + s), dtype=np.int64)
    out[..., :n, :c] = A
    out[..., n:, c:] = B
    return out


# --- polynomial matrices -----------------------------------------------------------
def polymat_const(p: int, vars: Sequence[str], rows: Sequence[Sequence[int]]) -> PolyMat:
    return tuple(tuple(MPoly.const(p, vars, int(x)) for x in row) for row in rows)


def polymat_identity(p: int, vars: Sequence[str], n: int) -> PolyMat:
    return polymat_const(p, vars, identity(n).tolist())


def polymat_mul(A: PolyMat, B: PolyMat) -> PolyMat:
    _check_rings(A, B)
    f = A[0][0]
    if len(A[0]) != len(B):
        raise ValueError(f"shape mismatch: {len(A)}x{len(A[0])} @ {len(B)}x{len(B[0])}")
    out = []
    for row in A:
        out_row = []
        for j in range(len(B[0])):
            acc = MPoly.zero(f.p, f.vars)
            for k, a in enumerate(row):
                if a.terms and B[k][j].terms:
                    acc = mp_add(acc, mp_mul(a, B[k][j]))
            out_row.append(acc)
        out.append(tuple(out_row))
    return tuple(out)


def polymat_sub(A: PolyMat, B: PolyMat) -> PolyMat:
    _check_rings(A, B)
    return tuple(tuple(mp_add(a, mp_scale(b, -1)) for a, b in zip(ra, rb)) for ra, rb in zip(A, B))


def polymat_map(A: PolyMat, fn) -> PolyMat:  # noqa: ANN001
    return tuple(tuple(fn(x) for x in row) for row in A)


def polymat_reduce(A: PolyMat) -> PolyMat:
    return polymat_map(A, sl2_reduce)


def polymat_frobenius(A: PolyMat, e: int) -> PolyMat:
    return polymat_map(A, lambda f: frobenius(f, e))


def polymat_with_vars(A: PolyMat, vars: Sequence[str]) -> PolyMat:
    return polymat_map(A, lambda f: with_vars(f, vars))


def polymat_substitute(A: PolyMat, mapping: Mapping[str, MPoly]) -> PolyMat:
    return polymat_map(A, lambda f: substitute(f, mapping))


def polymat_is_zero(A: PolyMat) -> bool:
    return all(f.is_zero() for row in A for f in row)


def polymat_det(A: PolyMat) -> MPoly:
    """Определитель разложением по перестановкам (n <= 4)."""

    n = len(A)
    if any(len(row) != n for row in A):
        raise NotSquare("polymat_det expects a square matrix")
    f = A[0][0]
    acc = MPoly.zero(f.p, f.vars)
    for perm in permutations(range(n)):
        term = MPoly.const(f.p, f.vars, _perm_sign(perm))
        for i, j in enumerate(perm):
            if A[i][j].is_zero():
                break
            term = mp_mul(term, A[i][j])
        else:
            acc = mp_add(acc, term)
    return acc


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = list(perm)
    for i in range(len(seen)):
        for j in range(i + 1, len(seen)):
            if seen[i] > seen[j]:
                sign = -sign
    return sign


def polymat_eval(ctx: FieldCtx, A: PolyMat, arrays: Mapping[str, np.ndarray | int]) -> np.ndarray:
    shape = np.broadcast_shapes(*(np.shape(x) for x in arrays.values())) if arrays else ()
    rows = len(A)
    cols = len(A[0])
    out = np.zeros(shape + (rows, cols), dtype=np.int64)
    for i in range(rows):
        for j in range(cols):
            out[..., i, j] = np.broadcast_to(eval_batch(A[i][j], ctx, arrays), shape)
    return out


def polymat_format(A: PolyMat) -> list[list[str]]:
    return [[str(f) for f in row] for row in A]


# --- accumulated linear solving over F_p -------------------------------------------
class IncrementalSolver:
    """Накопительная редукция системы [A | b] над F_p.

    Базис хранится в приведенном ступенчатом виде, поэтому остаток новой строки
    вычисляется одним умножением. Первая строка, приводящая к 0 = c != 0,
    запоминается как сертификат несовместности.
    """

    def __init__(self, p: int, n_unknowns: int) -> None:
        if n_unknowns < 0:
            raise ValueError("n_unknowns must be >= 0")
        self.p = p
        self.n = n_unknowns
        self.basis = np.zeros((0, n_unknowns + 1), dtype=np.int64)
        self.pivots: list[int] = []
        self.rows_seen = 0
        self.inconsistent_at: tuple[object, np.ndarray] | None = None

    @property
    def rank(self) -> int:
        return len(self.pivots)

    @property
    def consistent(self) -> bool:
        return self.inconsistent_at is None

    @property
    def determined(self) -> bool:
        return self.consistent and self.rank == self.n

    def _reduce(self, rows: np.ndarray) -> np.ndarray:
        if not self.pivots:
            return rows % self.p
        return (rows - rows[:, self.pivots] @ self.basis) % self.p

    def _insert(self, row: np.ndarray) -> None:
        lead = int(np.flatnonzero(row)[0])
        row = (row * pow(int(row[lead]), -1, self.p)) % self.p
        if self.pivots:
            self.basis = (self.basis - np.outer(self.basis[:, lead], row)) % self.p
        order = np.searchsorted(self.pivots, lead)
        self.basis = np.insert(self.basis, order, row, axis=0)
        self.pivots.insert(int(order), lead)

    def add_rows(self, A: np.ndarray, b: np.ndarray, labels: Sequence[object] | None = None) -> None:
        A = _as_codes(A).reshape(-1, self.n)
        b = _as_codes(b).reshape(-1)
        M = np.hstack([A, b[:, None]]) % self.p
        residual = self._reduce(M)
        live = np.flatnonzero(residual.any(axis=1))
        for idx in live:
            if self.inconsistent_at is not None:
                break
            row = self._reduce(M[idx : idx + 1])[0]
            if not row.any():
                continue
            if int(np.flatnonzero(row)[0]) == self.n:
                label = labels[idx] if labels is not None else self.rows_seen + int(idx)
                self.inconsistent_at = (label, M[idx].copy())
                break
            self._insert(row)
        self.rows_seen += M.shape[0]

    def free_columns(self) -> list[int]:
        return [c for c in range(self.n) if c not in self.pivots]

    def solution(self) -> np.ndarray:
        """Единственное решение; вызывать только при determined."""

        if not self.determined:
            raise ValueError("system is not uniquely determined")
        out = np.zeros(self.n, dtype=np.int64)
        for row, col in zip(self.basis, self.pivots):
            out[col] = row[self.n]
        return out
