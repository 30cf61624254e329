"""Инварианты, классификация, эквивалентность и разложение над F_q.

Представление задается образами образующих SL(2, F_q): u+(g^i), u-(g^i) для
i < m и диагональю diag(g, g^{-1}), где g: примитивный элемент поля.
"""

from __future__ import annotations

import logging
from collections.abc import Iterator
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np

from .catalog import FormSpec, build_sigma, sharp_catalog, small_catalog
from .catalog.contracts import ClosedFormRep, GenDatum
from .catalog.small import SMALL_FAMILIES
from .errors import AmbiguousMatch, BadParams, FieldTooSmall, NoMatch, SearchBudgetExceeded, UnidentifiedSummand
from .field import FieldCtx, get_field, lower, torus, upper
from .linalg import column_space, identity, kron_product, mat_inv, mat_mul, mat_sub, nullspace, rank, rref
from .models import DecompositionModel, EquivalenceModel, SignatureModel, SummandModel
from .verify import evaluate, rep_degree

logger = logging.getLogger(__name__)

DEFAULT_SEARCH_BUDGET = 10**6
RANDOM_TRIES = 256


# --- images ----------------------------------------------------------------------
@dataclass(frozen=True)
class RepImages:
    ctx: FieldCtx
    plus: np.ndarray  # (m, n, n)
    minus: np.ndarray  # (m, n, n)
    torus: np.ndarray  # (n, n)

    @property
    def n(self) -> int:
        return int(self.torus.shape[-1])

    @property
    def generators(self) -> np.ndarray:
        return np.concatenate([self.plus, self.minus, self.torus[None]], axis=0)

    def conjugate(self, P: np.ndarray) -> RepImages:
        """Образы Inn_P o sigma: P^{-1} sigma(g) P."""

        ctx = self.ctx
        P_inv = mat_inv(ctx, P)

        def inn(A: np.ndarray) -> np.ndarray:
            return mat_mul(ctx, mat_mul(ctx, P_inv, A), P)

        return RepImages(ctx, inn(self.plus), inn(self.minus), inn(self.torus))

    def block(self, lo: int, hi: int) -> RepImages:
        s = slice(lo, hi)
        return RepImages(self.ctx, self.plus[:, s, s], self.minus[:, s, s], self.torus[s, s])


def _basis_points(ctx: FieldCtx) -> np.ndarray:
    """g^0, ..., g^{m-1}: базис F_q над F_p."""

    return np.array([int(ctx.pow(ctx.gen, i)) for i in range(ctx.m)], dtype=np.int64)


def rep_images(rep: ClosedFormRep | GenDatum, ctx: FieldCtx) -> RepImages:
    points = _basis_points(ctx)
    return RepImages(
        ctx=ctx,
        plus=evaluate(rep, ctx, upper(ctx, points)),
        minus=evaluate(rep, ctx, lower(ctx, points)),
        torus=evaluate(rep, ctx, torus(ctx, ctx.gen)),
    )


def random_regular(ctx: FieldCtx, n: int, rng: np.random.Generator) -> np.ndarray:
    while True:
        P = rng.integers(0, ctx.q, size=(n, n))
        if rank(ctx, P) == n:
            return P.astype(np.int64)


# --- fixed vectors and signatures ---------------------------------------------------------
def _stacked_minus_identity(ctx: FieldCtx, mats: np.ndarray) -> np.ndarray:
    n = mats.shape[-1]
    return ctx.sub(mats, identity(n)[None]).reshape(-1, n)


def _fixed_dim(ctx: FieldCtx, mats: np.ndarray) -> int:
    return mats.shape[-1] - rank(ctx, _stacked_minus_identity(ctx, mats))


def _fixed_pair(ctx: FieldCtx, mats: np.ndarray) -> tuple[int, int]:
    return _fixed_dim(ctx, mats), _fixed_dim(ctx, np.swapaxes(mats, -1, -2))


def fixed_dims(images: RepImages) -> tuple[int, int]:
    """d(sigma) = (dim V^sigma, dim W^sigma): неподвижные столбцы и строки."""

    if images.ctx.q < 4:
        raise FieldTooSmall(f"fixed_dims needs q >= 4 so that the torus generator has order >= 3, got q={images.ctx.q}")
    return _fixed_pair(images.ctx, images.generators)


def unipotent_dims(images: RepImages) -> tuple[int, int]:
    """(dim V^{U+}, dim V^{U-}) по образам всей унипотентной подгруппы F_q."""

    ctx = images.ctx
    return _fixed_dim(ctx, images.plus), _fixed_dim(ctx, images.minus)


@dataclass(frozen=True)
class Signature:
    weights: tuple[int, ...]
    d_sigma: tuple[int, int]
    d_unipotent: tuple[int, int]
    end_dim: int
    modulus: int | None = None

    def residues(self, modulus: int) -> Signature:
        weights = tuple(sorted((w % modulus for w in self.weights), reverse=True))
        return Signature(weights, self.d_sigma, self.d_unipotent, self.end_dim, modulus)

    @property
    def key(self) -> tuple:
        return (self.weights, self.d_sigma, self.d_unipotent, self.end_dim, self.modulus)

    def to_model(self, q: int, form: str | None = None) -> SignatureModel:
        return SignatureModel(
            form=form,
            q=q,
            weights=list(self.weights),
            weights_modulus=self.modulus,
            d_sigma=list(self.d_sigma),
            d_unipotent=list(self.d_unipotent),
            end_dim=self.end_dim,
        )


def exact_weights(rep: ClosedFormRep) -> tuple[int, ...]:
    """Веса тора с диагонали нормальной формы при b = c = 0."""

    scales = [rep.p**e for e in rep.twists]
    weights = []
    for i, row in enumerate(rep.entries):
        for j, f in enumerate(row):
            # блок k занимает позиции 4k..4k+3: (a, b, c, d)
            restricted = {
                exps: c
                for exps, c in f.terms.items()
                if all(exps[4 * k + 1] == 0 and exps[4 * k + 2] == 0 for k in range(len(scales)))
            }
            if i != j:
                if restricted:
                    raise BadParams(f"{rep.label}: torus image is not diagonal at entry ({i + 1},{j + 1})")
                continue
            if len(restricted) != 1:
                raise BadParams(f"{rep.label}: diagonal entry {i + 1} is not a monomial at b = c = 0")
            [(exps, coef)] = restricted.items()
            if coef != 1:
                raise BadParams(f"{rep.label}: diagonal entry {i + 1} has coefficient {coef}")
            weights.append(sum((exps[4 * k] - exps[4 * k + 3]) * s for k, s in enumerate(scales)))
    return tuple(sorted(weights, reverse=True))


def signature_field_ok(rep: ClosedFormRep, ctx: FieldCtx) -> None:
    twist = max(rep.twists)
    degree = rep_degree(rep)
    if twist >= ctx.m or ctx.q <= degree or ctx.q < 4:
        raise FieldTooSmall(
            f"{rep.label or 'representation'} needs m > {twist} and q > {degree} (and q >= 4), got F_{ctx.q}"
        )


def signature(spec: FormSpec, ctx: FieldCtx) -> Signature:
    rep = build_sigma(spec)
    signature_field_ok(rep, ctx)
    images = rep_images(rep, ctx)
    return Signature(
        weights=exact_weights(rep),
        d_sigma=fixed_dims(images),
        d_unipotent=unipotent_dims(images),
        end_dim=endomorphism_algebra(images).dim,
    )


def numeric_signature(images: RepImages) -> Signature:
    """Сигнатура по образам: веса как вычеты mod q-1 по кратностям собственных значений g^w."""

    ctx = images.ctx
    n = images.n
    order = ctx.q - 1
    weights: list[int] = []
    for w in range(order):
        shifted = ctx.sub(images.torus, ctx.mul(identity(n), int(ctx.pow(ctx.gen, w))))
        weights.extend([w] * (n - rank(ctx, shifted)))
    return Signature(
        weights=tuple(sorted(weights, reverse=True)),
        d_sigma=fixed_dims(images),
        d_unipotent=unipotent_dims(images),
        end_dim=endomorphism_algebra(images).dim,
        modulus=order,
    )


# --- endomorphisms -------------------------------------------------------------------
@dataclass(frozen=True)
class EndAlgebra:
    ctx: FieldCtx
    basis: np.ndarray  # (k, n, n)

    @property
    def dim(self) -> int:
        return int(self.basis.shape[0])


def _intertwiner_system(ctx: FieldCtx, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Строки уравнений X right(g) = left(g) X на vec(X) по строкам."""

    n = left.shape[-1]
    I = identity(n)
    blocks = []
    for L, R in zip(left, right):
        xr = kron_product(I, np.swapaxes(R, -1, -2), ctx)
        lx = kron_product(L, I, ctx)
        blocks.append(ctx.sub(xr, lx))
    return np.concatenate(blocks, axis=0)


def intertwiners(images1: RepImages, images2: RepImages) -> np.ndarray:
    """Базис {X : X sigma2(g) = sigma1(g) X}, форма (k, n, n)."""

    ctx = images1.ctx
    n = images1.n
    system = _intertwiner_system(ctx, images1.generators, images2.generators)
    return nullspace(ctx, system).reshape(-1, n, n)


def endomorphism_algebra(images: RepImages) -> EndAlgebra:
    return EndAlgebra(images.ctx, intertwiners(images, images))


# --- indecomposability ---------------------------------------------------------------
def mat_pow(ctx: FieldCtx, X: np.ndarray, k: int) -> np.ndarray:
    out = identity(X.shape[-1])
    for _ in range(k):
        out = mat_mul(ctx, out, X)
    return out


def _single_eigenvalue(ctx: FieldCtx, X: np.ndarray) -> int | None:
    n = X.shape[-1]
    lam = ctx.elements()
    shifted = ctx.sub(X[None], ctx.mul(lam[:, None, None], identity(n)[None]))
    powers = mat_pow(ctx, shifted, n)
    hits = np.flatnonzero(~powers.any(axis=(-1, -2)))
    return int(lam[hits[0]]) if hits.size else None


def _span_basis(ctx: FieldCtx, mats: list[np.ndarray]) -> list[np.ndarray]:
    """Базис линейной оболочки матриц (строки RREF)."""

    if not mats:
        return []
    n = mats[0].shape[-1]
    R, pivots = rref(ctx, np.stack([np.asarray(m).ravel() for m in mats]))
    return [R[i].reshape(n, n) for i in range(len(pivots))]


def is_local(end: EndAlgebra) -> bool:
    """End = F_q I + J с нильпотентным идеалом J: точный признак неразложимости."""

    ctx = end.ctx
    n = end.basis.shape[-1]
    shifted: list[np.ndarray] = []
    for X in end.basis:
        lam = _single_eigenvalue(ctx, X)
        if lam is None:
            return False
        N = ctx.sub(X, ctx.mul(identity(n), lam))
        if N.any():
            shifted.append(N)
    radical = _span_basis(ctx, shifted)
    if not radical:
        return True
    products = [mat_mul(ctx, A, B) for A in radical for B in radical]
    if len(_span_basis(ctx, radical + products)) != len(radical):
        return False
    layer = radical
    for _ in range(n):
        layer = _span_basis(ctx, [mat_mul(ctx, A, B) for A in radical for B in layer])
        if not layer:
            return True
    return False


def _combine(ctx: FieldCtx, basis: np.ndarray, coeffs: np.ndarray | tuple[int, ...]) -> np.ndarray:
    out = np.zeros(basis.shape[1:], dtype=np.int64)
    for c, B in zip(coeffs, basis):
        if int(c):
            out = ctx.add(out, ctx.mul(int(c), B))
    return out


def _candidates(end: EndAlgebra, budget: int, seed: int, random_tries: int) -> Iterator[np.ndarray]:
    """Базисные элементы, сдвиги на собственные значения, F_p-комбинации, случайные F_q-комбинации."""

    ctx = end.ctx
    n = end.basis.shape[-1]
    yield from end.basis
    for X in end.basis:
        if _single_eigenvalue(ctx, X) is None:
            for value in ctx.elements():
                yield ctx.sub(X, ctx.mul(identity(n), int(value)))
    k = end.dim
    if ctx.p**k <= budget:
        for coeffs in product(range(ctx.p), repeat=k):
            if any(coeffs):
                yield _combine(ctx, end.basis, coeffs)
    rng = np.random.default_rng(seed)
    for _ in range(random_tries):
        yield _combine(ctx, end.basis, rng.integers(0, ctx.q, size=k))


def splitting_element(images: RepImages, budget: int = DEFAULT_SEARCH_BUDGET, seed: int = 0) -> np.ndarray | None:
    """X из End с 0 < rank X^n < n; None если End локальна."""

    end = endomorphism_algebra(images)
    if end.dim == 1 or is_local(end):
        return None
    ctx = images.ctx
    n = images.n
    for X in _candidates(end, budget, seed, RANDOM_TRIES):
        r = rank(ctx, mat_pow(ctx, X, n))
        if 0 < r < n:
            return X
    raise SearchBudgetExceeded(f"no Fitting-splitting endomorphism found within budget {budget} (End dim {end.dim})")


def is_indecomposable(images: RepImages, budget: int = DEFAULT_SEARCH_BUDGET, seed: int = 0) -> bool:
    return splitting_element(images, budget, seed) is None


def fitting_idempotent(ctx: FieldCtx, X: np.ndarray) -> np.ndarray:
    """Проектор на im X^n вдоль ker X^n."""

    n = X.shape[-1]
    Y = mat_pow(ctx, X, n)
    image = column_space(ctx, Y)
    kernel = nullspace(ctx, Y).T
    Q = np.concatenate([image, kernel], axis=1)
    r = image.shape[1]
    D = np.zeros((n, n), dtype=np.int64)
    D[np.arange(r), np.arange(r)] = 1
    return mat_mul(ctx, mat_mul(ctx, Q, D), mat_inv(ctx, Q))


# --- equivalence ---------------------------------------------------------------------
@dataclass(frozen=True)
class Equivalence:
    equivalent: bool
    conjugator: np.ndarray | None
    exact: bool
    note: str = ""

    def to_model(self, q: int) -> EquivalenceModel:
        return EquivalenceModel(
            equivalent=self.equivalent,
            exact=self.exact,
            q=q,
            conjugator=self.conjugator.tolist() if self.conjugator is not None else None,
            note=self.note,
        )


def _is_conjugator(images1: RepImages, images2: RepImages, P: np.ndarray) -> bool:
    return bool(np.array_equal(images1.conjugate(P).generators, images2.generators))


def check_equivalence(
    images1: RepImages,
    images2: RepImages,
    budget: int = DEFAULT_SEARCH_BUDGET,
    seed: int = 0,
    strict: bool = False,
) -> Equivalence:
    """Ищет P с P^{-1} sigma1(g) P = sigma2(g).

    Сначала дешевые инварианты, затем пространство сплетающих операторов и
    поиск обратимого элемента в нем.
    """

    ctx = images1.ctx
    if images2.ctx != ctx:
        raise ValueError(f"images live over different fields: F_{ctx.q} and F_{images2.ctx.q}")
    if images1.n != images2.n:
        return Equivalence(False, None, True, "dimensions differ")
    if np.array_equal(images1.generators, images2.generators):
        return Equivalence(True, identity(images1.n), True, "identical images")
    if ctx.q >= 4:
        s1, s2 = numeric_signature(images1), numeric_signature(images2)
        if s1.key != s2.key:
            return Equivalence(False, None, True, "signatures differ")
    basis = intertwiners(images1, images2)
    if basis.shape[0] == 0:
        return Equivalence(False, None, True, "intertwiner space is zero")
    n = images1.n
    end = EndAlgebra(ctx, basis)
    tried = 0
    for X in _candidates(end, budget, seed, RANDOM_TRIES):
        tried += 1
        if rank(ctx, X) == n and _is_conjugator(images1, images2, X):
            return Equivalence(True, X, True, f"invertible intertwiner found after {tried} candidates")
    note = f"no invertible element among {tried} candidates of a {basis.shape[0]}-dimensional intertwiner space"
    if strict:
        raise SearchBudgetExceeded(note)
    return Equivalence(False, None, False, note)


# --- classification --------------------------------------------------------------------
@lru_cache(maxsize=64)
def _sharp_table(p: int, m: int, e_max: int) -> tuple[tuple[FormSpec, Signature, RepImages], ...]:
    ctx = get_field(p, m)
    out = []
    for spec in sharp_catalog(p, e_max):
        images = rep_images(build_sigma(spec), ctx)
        out.append((spec, numeric_signature(images), images))
    return tuple(out)


def classify(images: RepImages, e_max: int = 1, budget: int = DEFAULT_SEARCH_BUDGET, seed: int = 0) -> FormSpec:
    """Класс SHARP-каталога, сопряженный представлению над тем же F_q."""

    ctx = images.ctx
    e_cap = min(e_max, ctx.m - 1)
    target = numeric_signature(images)
    matches = [(spec, imgs) for spec, sig, imgs in _sharp_table(ctx.p, ctx.m, e_cap) if sig.key == target.key]
    if not matches:
        raise NoMatch(f"no SHARP class with e <= {e_cap} has signature {target.key} over F_{ctx.q}")
    if len(matches) == 1:
        return matches[0][0]
    confirmed = [spec for spec, imgs in matches if check_equivalence(images, imgs, budget, seed).equivalent]
    if len(confirmed) == 1:
        return confirmed[0]
    if not confirmed:
        raise NoMatch(f"signature matches {[str(s) for s, _ in matches]} but none is conjugate over F_{ctx.q}")
    raise AmbiguousMatch(f"representation is conjugate to several classes: {[str(s) for s in confirmed]}")


# --- decomposition ---------------------------------------------------------------------
@dataclass(frozen=True)
class DecompositionReport:
    summands: list[tuple[FormSpec, int]]
    conjugator: np.ndarray
    blocks: tuple[int, ...] = field(default_factory=tuple)
    indecomposable: bool = False

    def to_model(self, q: int, form: str | None = None) -> DecompositionModel:
        return DecompositionModel(
            form=form,
            q=q,
            indecomposable=self.indecomposable,
            summands=[SummandModel(form=s.form, params=s.param_map, multiplicity=k) for s, k in self.summands],
            conjugator=self.conjugator.tolist(),
        )


def _split(images: RepImages, budget: int, seed: int) -> tuple[np.ndarray, list[RepImages]]:
    """Рекурсивное расщепление Фиттинга: сопрягающая Q и неразложимые блоки."""

    ctx = images.ctx
    n = images.n
    X = splitting_element(images, budget, seed) if n > 1 else None
    if X is None:
        return identity(n), [images]
    E = fitting_idempotent(ctx, X)
    image = column_space(ctx, E)
    Q = np.concatenate([image, column_space(ctx, mat_sub(ctx, identity(n), E))], axis=1)
    r = image.shape[1]
    conj = images.conjugate(Q)
    Q1, parts1 = _split(conj.block(0, r), budget, seed)
    Q2, parts2 = _split(conj.block(r, n), budget, seed)
    inner = np.zeros((n, n), dtype=np.int64)
    inner[:r, :r] = Q1
    inner[r:, r:] = Q2
    return mat_mul(ctx, Q, inner), parts1 + parts2


def _identify_small(block: RepImages, budget: int, seed: int) -> FormSpec:
    ctx = block.ctx
    n = block.n
    candidates = [
        spec
        for spec in small_catalog(ctx.p, ctx.m - 1, dim=n)
        if SMALL_FAMILIES[spec.label].indecomposable
    ]
    for spec in candidates:
        other = rep_images(build_sigma(spec), ctx)
        if check_equivalence(block, other, budget, seed).equivalent:
            return spec
    raise UnidentifiedSummand(f"{n}-dimensional indecomposable summand matches no small family over F_{ctx.q}")


def decompose(
    images: RepImages,
    budget: int = DEFAULT_SEARCH_BUDGET,
    seed: int = 0,
    form: FormSpec | None = None,
    e_max: int = 1,
) -> DecompositionReport:
    """Неразложимые слагаемые с кратностями и сопрягающая матрица блочного вида."""

    Q, parts = _split(images, budget, seed)
    if len(parts) == 1:
        own = form if form is not None else classify(images, e_max, budget, seed)
        return DecompositionReport([(own, 1)], Q, (images.n,), indecomposable=True)
    counts: dict[str, tuple[FormSpec, int]] = {}
    for part in parts:
        spec = _identify_small(part, budget, seed)
        key = str(spec)
        prev = counts.get(key)
        counts[key] = (spec, 1 if prev is None else prev[1] + 1)
    logger.debug("decomposed into %s", [k for k in counts])
    return DecompositionReport(list(counts.values()), Q, tuple(p.n for p in parts))
