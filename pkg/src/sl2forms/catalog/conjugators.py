"""Таблица явных сопрягающих матриц: Inn_P o source = target o F^e.

Соглашения: Inn_P(A) = P^{-1} A P, Inn_{QP} = Inn_P o Inn_Q.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from ..errors import UnknownLemma
from ..field import get_field
from ..linalg import diag, identity, mat_inv, mat_mul, perm_swap


def _P(i: int, j: int) -> np.ndarray:
    return perm_swap(4, i, j)


def _prod(*mats: np.ndarray) -> np.ndarray:
    out = identity(4)
    for M in mats:
        out = out @ M
    return out


def _p1() -> np.ndarray:
    return np.array([[1, 0, 0, 1], [0, 1, 0, 0], [0, 0, 1, 0], [1, 0, 0, 0]], dtype=np.int64)


def _p2() -> np.ndarray:
    return _prod(_P(3, 4), _P(1, 2))


def _p2_p1_p2inv(p: int) -> np.ndarray:
    ctx = get_field(p)
    P2 = _p2() % p
    return mat_mul(ctx, mat_mul(ctx, P2, _p1() % p), mat_inv(ctx, P2))


@dataclass(frozen=True)
class ConjugatorRow:
    """source и target заданы строками вида 'star:I'; twist называет параметр Фробениуса цели."""

    key: str
    source: str
    target: str
    description: str
    build: Callable[[int], np.ndarray]
    twist: str | None = None
    target_params: str = "same"  # same | none | xv_from_e1
    note: str = ""

    def matrix(self, p: int) -> np.ndarray:
        return np.asarray(self.build(p), dtype=np.int64) % p


def _const(fn: Callable[[], np.ndarray]) -> Callable[[int], np.ndarray]:
    return lambda p: fn()


CONJUGATORS: dict[str, ConjugatorRow] = {
    row.key: row
    for row in [
        ConjugatorRow("5.2", "star:I", "plus:I", "I", _const(lambda: identity(4)), twist="e1", target_params="none"),
        ConjugatorRow("5.4", "star:II", "plus:II", "P34*P23", _const(lambda: _prod(_P(3, 4), _P(2, 3))), twist="e1", target_params="none"),
        ConjugatorRow("5.6", "star:IV", "sharp:IV", "I", _const(lambda: identity(4))),
        ConjugatorRow("5.8", "star:V", "plus:V", "P34*P12", _const(_p2), twist="e1", target_params="none"),
        ConjugatorRow("5.10", "star:VII", "plus:VII", "P12*P23", _const(lambda: _prod(_P(1, 2), _P(2, 3))), twist="e1", target_params="none"),
        ConjugatorRow("5.12", "star:IX", "plus:IX", "P34", _const(lambda: _P(3, 4)), twist="e1", target_params="none"),
        ConjugatorRow("5.14", "star:XI", "plus:XI", "P34*P23", _const(lambda: _prod(_P(3, 4), _P(2, 3))), twist="e1", target_params="none"),
        ConjugatorRow("5.16", "star:XV", "sharp:XV", "P34*P23", _const(lambda: _prod(_P(3, 4), _P(2, 3)))),
        ConjugatorRow("5.18", "star:XIX", "plus:XIX", "P23*P34*P23", _const(lambda: _prod(_P(2, 3), _P(3, 4), _P(2, 3))), twist="e1", target_params="none"),
        ConjugatorRow(
            "5.20", "star:XXI", "plus:V", "P2*P1", _const(lambda: _p2() @ _p1()), twist="e1", target_params="none",
            note="lands on plus:V twisted by e1; star:V itself needs P2*P1*P2^-1 (key 5.20b)",
        ),
        ConjugatorRow("5.20a", "plus:XXI", "plus:V", "P1", _const(_p1), target_params="none"),
        ConjugatorRow("5.20b", "star:XXI", "star:V", "P2*P1*P2^-1", _p2_p1_p2inv),
        ConjugatorRow("5.21", "star:XXII", "star:XV", "P34", _const(lambda: _P(3, 4)), target_params="xv_from_e1"),
        ConjugatorRow("5.22", "star:XXIV", "plus:XXIV", "P34*P23", _const(lambda: _prod(_P(3, 4), _P(2, 3))), twist="e2", target_params="none"),
        ConjugatorRow("5.24", "star:XXVI", "plus:XXVI", "I", _const(lambda: identity(4)), target_params="none"),
        ConjugatorRow("6.1", "star:I", "sharp:I", "diag(1,1,2,6)", _const(lambda: diag([1, 1, 2, 6]))),
        ConjugatorRow("6.3", "star:II", "sharp:II", "P34*P23", _const(lambda: _prod(_P(3, 4), _P(2, 3)))),
        ConjugatorRow("6.5", "star:IV", "sharp:IV", "I", _const(lambda: identity(4))),
        ConjugatorRow("6.7", "star:V", "sharp:V", "P34*P12", _const(_p2)),
        ConjugatorRow("6.9", "star:VII", "sharp:VII", "P12*P23", _const(lambda: _prod(_P(1, 2), _P(2, 3)))),
        ConjugatorRow(
            "6.11", "star:IX", "sharp:IX", "P34*diag(1,1,2,1)", _const(lambda: _P(3, 4) @ diag([1, 1, 2, 1])),
            note="the bare P34 only reaches plus:IX; the diagonal factor rescales to sharp:IX",
        ),
        ConjugatorRow("6.13", "star:XI", "sharp:XI", "P34*P23", _const(lambda: _prod(_P(3, 4), _P(2, 3)))),
        ConjugatorRow("6.15", "star:XV", "sharp:XV", "P34*P23", _const(lambda: _prod(_P(3, 4), _P(2, 3)))),
        ConjugatorRow("6.17", "star:XIX", "sharp:XIX", "P23*P34*P23", _const(lambda: _prod(_P(2, 3), _P(3, 4), _P(2, 3)))),
        ConjugatorRow("6.19", "star:XXIV", "sharp:XXIV", "P34*P23", _const(lambda: _prod(_P(3, 4), _P(2, 3)))),
        ConjugatorRow("6.21", "star:XXVI", "sharp:XXVI", "I", _const(lambda: identity(4))),
    ]
}  # fmt: skip


def conjugator_row(lemma: str) -> ConjugatorRow:
    key = str(lemma).strip()
    if key.lower().startswith("lemma"):
        key = key[5:].strip()
    row = CONJUGATORS.get(key)
    if row is None:
        raise UnknownLemma(f"no conjugator for lemma {lemma!r}; known: {sorted(CONJUGATORS)}")
    return row


def conjugator_for(lemma: str, p: int) -> np.ndarray:
    return conjugator_row(lemma).matrix(p)
