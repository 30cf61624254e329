from __future__ import annotations

import numpy as np
import pytest

from sl2forms.errors import NotSquare, RingMismatch, SingularMatrix
from sl2forms.field import get_field
from sl2forms.linalg import (
    IncrementalSolver,
    det,
    diag,
    direct_sum,
    identity,
    inn,
    kron_product,
    mat_inv,
    mat_mul,
    nullspace,
    perm_matrix,
    perm_swap,
    polymat_det,
    polymat_format,
    rank,
    rref,
    tau_transpose,
)
from sl2forms.symbolic import parse_poly


def _poly_rows(rows: list[list[str]], p: int, vars: tuple[str, ...]) -> tuple:
    return tuple(tuple(parse_poly(text, p, vars) for text in row) for row in rows)


@pytest.mark.parametrize("p,m", [(2, 2), (3, 1), (5, 1), (3, 2)])
def test_inverse_and_determinant(p: int, m: int) -> None:
    ctx = get_field(p, m)
    rng = np.random.default_rng(3)
    for _ in range(20):
        A = rng.integers(0, ctx.q, size=(4, 4))
        if det(ctx, A) == 0:
            with pytest.raises(SingularMatrix):
                mat_inv(ctx, A)
            continue
        assert np.array_equal(mat_mul(ctx, A, mat_inv(ctx, A)), identity(4))
        assert det(ctx, mat_inv(ctx, A)) == int(ctx.inv(det(ctx, A)))


def test_rref_rank_and_nullspace() -> None:
    ctx = get_field(5)
    A = np.array([[1, 2, 3], [2, 4, 0], [3, 1, 3]])
    R, pivots = rref(ctx, A)
    assert pivots == (0, 2)
    assert rank(ctx, A) == 2
    N = nullspace(ctx, A)
    assert N.shape == (1, 3)
    assert not np.any(mat_mul(ctx, A, N.T))


def test_non_square_inputs() -> None:
    ctx = get_field(3)
    with pytest.raises(NotSquare):
        det(ctx, np.zeros((2, 3), dtype=np.int64))
    with pytest.raises(NotSquare):
        mat_inv(ctx, np.zeros((2, 3), dtype=np.int64))


def test_permutation_helpers() -> None:
    P = perm_swap(4, 1, 2)
    assert P[0].tolist() == [0, 1, 0, 0]
    Q = perm_matrix([2, 3, 1])
    assert Q[:, 0].tolist() == [0, 1, 0]
    with pytest.raises(ValueError, match="not a permutation"):
        perm_matrix([1, 1, 2])


def test_inn_is_conjugation() -> None:
    ctx = get_field(5)
    P = diag([1, 2, 3, 4])
    A = np.arange(16).reshape(4, 4) % 5
    B = inn(ctx, P, A)
    assert np.array_equal(mat_mul(ctx, P, B), mat_mul(ctx, A, P))


def test_tau_transpose_reflects_across_antidiagonal() -> None:
    A = np.arange(16).reshape(4, 4)
    T = tau_transpose(A)
    # (a,b;c,d) -> (d,b;c,a) on 2x2
    assert tau_transpose(np.array([[1, 2], [3, 4]])).tolist() == [[4, 2], [3, 1]]
    assert T[0, 0] == A[3, 3] and T[0, 3] == A[0, 3] and T[1, 0] == A[3, 2]
    assert np.array_equal(tau_transpose(T), A)


@pytest.mark.parametrize("p,m", [(2, 1), (2, 3), (3, 2), (5, 1), (7, 2)])
def test_tau_transpose_reverses_products(p: int, m: int) -> None:
    ctx = get_field(p, m)
    rng = np.random.default_rng(p * 10 + m)
    for n in (1, 2, 3, 4):
        A, B = (rng.integers(0, ctx.q, size=(n, n)) for _ in range(2))
        lhs = tau_transpose(mat_mul(ctx, A, B))
        assert np.array_equal(lhs, mat_mul(ctx, tau_transpose(B), tau_transpose(A)))


def test_tau_transpose_on_polynomial_matrix() -> None:
    M = _poly_rows([["a", "b"], ["c", "d"]], 3, ("a", "b", "c", "d"))
    assert polymat_format(tau_transpose(M)) == [["d", "b"], ["c", "a"]]


def test_kron_and_direct_sum() -> None:
    ctx = get_field(3)
    A = np.array([[1, 2], [0, 1]])
    B = np.array([[2, 0], [1, 1]])
    K = kron_product(A, B, ctx)
    assert K.shape == (4, 4)
    assert K[0:2, 2:4].tolist() == ((2 * B) % 3).tolist()
    S = direct_sum(A, B)
    assert S[2:, 2:].tolist() == B.tolist()
    assert not S[:2, 2:].any()
    with pytest.raises(RingMismatch):
        kron_product(A, B)


def test_polymat_kron_mixed_product_and_det() -> None:
    vars = ("a", "b", "c", "d")
    M = _poly_rows([["a", "b"], ["c", "d"]], 5, vars)
    K = kron_product(M, M)
    assert polymat_format(K)[0] == ["a^2", "a*b", "a*b", "b^2"]
    assert str(polymat_det(M)) == "a*d + 4*b*c"
    with pytest.raises(RingMismatch):
        kron_product(M, np.eye(2, dtype=np.int64))


def test_incremental_solver_detects_inconsistency_and_solution() -> None:
    solver = IncrementalSolver(5, 2)
    solver.add_rows(np.array([[1, 1]]), np.array([3]))
    assert solver.consistent and not solver.determined
    solver.add_rows(np.array([[1, 4]]), np.array([1]))
    assert solver.determined
    x = solver.solution()
    assert ((x[0] + x[1]) % 5, (x[0] + 4 * x[1]) % 5) == (3, 1)
    solver.add_rows(np.array([[2, 2]]), np.array([0]))
    assert not solver.consistent
