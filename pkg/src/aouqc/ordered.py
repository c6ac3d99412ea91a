"""Finite-dimensional *-vector spaces, matrix levels over them, and cones.

A :class:`StarSpace` fixes a basis; elements are coefficient vectors and
elements of ``M_n(V)`` are stacks of ``n x n`` coefficient matrices, one per
basis vector, so ``x = sum_b X_b ⊗ v_b``.

Cones are membership oracles at every matrix level.  The two concrete
families used throughout are

* :class:`MaxCone`: the smallest matrix ordering over a finitely generated
  ground cone, ``x = sum_j g_j ⊗ S_j`` with ``S_j`` PSD;
* :class:`DiagonalCone`: the ordering inherited from an embedding of the
  space into diagonal matrices.

Both expose a conic lift (``lift``) so that the compression machinery can
pose "is ``x + sum t_k d_k`` in the cone for some ``t``" as one semidefinite
feasibility problem.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import conic
from .conic import (LpProblem, PsdAffineProblem, Verdict, hvec_adjoint, hvec_length,
                    lp_feasible, member, non_member, psd_affine_feasible, unknown)
from .linalg import DEFAULT_TOL, Tolerance, direct_sum, kron, spectral_norm

DEFAULT_SCHEDULE = (1e-1, 1e-2, 1e-3, 1e-4)
COEFF_ATOL = 1e-12


# ------------------------------------------------------------------ spaces


class StarSpace:
    """A *-vector space with a fixed basis.

    The involution acts on coefficient vectors as ``c -> T @ conj(c)`` for a
    real matrix ``T`` (identity when every basis vector is hermitian).
    """

    def __init__(self, labels, unit, involution=None):
        self.labels = tuple(str(s) for s in labels)
        d = len(self.labels)
        self.unit_coeffs = np.asarray(unit, dtype=complex).reshape(-1)
        if self.unit_coeffs.shape != (d,):
            raise ValueError("unit has the wrong length")
        T = np.eye(d) if involution is None else np.asarray(involution, dtype=float)
        if T.shape != (d, d):
            raise ValueError("involution has the wrong shape")
        if not np.allclose(T @ T, np.eye(d), atol=1e-10):
            raise ValueError("involution is not an involution")
        self.involution = T
        if not self.is_hermitian_coeffs(self.unit_coeffs):
            raise ValueError("unit must be hermitian")

    @property
    def dim(self) -> int:
        return len(self.labels)

    @property
    def hermitian_basis(self) -> bool:
        return np.array_equal(self.involution, np.eye(self.dim))

    def star_coeffs(self, c):
        return self.involution @ np.conj(np.asarray(c, dtype=complex))

    def is_hermitian_coeffs(self, c, atol: float = COEFF_ATOL) -> bool:
        c = np.asarray(c, dtype=complex)
        return bool(np.allclose(self.star_coeffs(c), c, rtol=0.0, atol=atol))

    def element(self, coeffs) -> "SpaceElement":
        return SpaceElement(self, coeffs)

    def basis_element(self, i) -> "SpaceElement":
        if isinstance(i, str):
            i = self.labels.index(i)
        c = np.zeros(self.dim)
        c[i] = 1.0
        return SpaceElement(self, c)

    @property
    def unit(self) -> "SpaceElement":
        return SpaceElement(self, self.unit_coeffs)

    def zero(self, level: int | None = None):
        if level is None:
            return SpaceElement(self, np.zeros(self.dim))
        return MatrixElement(self, np.zeros((self.dim, level, level)))

    def unit_matrix(self, level: int) -> "MatrixElement":
        """``I_level ⊗ e``."""
        return MatrixElement.from_scalar(np.eye(level), self.unit)

    def __repr__(self):
        return f"StarSpace(dim={self.dim}, labels={list(self.labels)[:6]}{'...' if self.dim > 6 else ''})"


class SpaceElement:
    __slots__ = ("space", "coeffs")

    def __init__(self, space: StarSpace, coeffs):
        c = np.asarray(coeffs)
        if c.shape != (space.dim,):
            raise ValueError(f"expected {space.dim} coefficients, got shape {c.shape}")
        self.space = space
        self.coeffs = c.astype(complex) if np.iscomplexobj(c) else c.astype(float)

    def _check(self, other):
        if not isinstance(other, SpaceElement) or other.space is not self.space:
            raise ValueError("elements live in different spaces")

    def __add__(self, other):
        self._check(other)
        return SpaceElement(self.space, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check(other)
        return SpaceElement(self.space, self.coeffs - other.coeffs)

    def __neg__(self):
        return SpaceElement(self.space, -self.coeffs)

    def __mul__(self, s):
        return SpaceElement(self.space, s * self.coeffs)

    __rmul__ = __mul__

    def __truediv__(self, s):
        return SpaceElement(self.space, self.coeffs / s)

    def star(self):
        return SpaceElement(self.space, self.space.star_coeffs(self.coeffs))

    def is_hermitian(self) -> bool:
        return self.space.is_hermitian_coeffs(self.coeffs)

    def perp(self):
        """``e - v``."""
        return self.space.unit - self

    def as_matrix(self) -> "MatrixElement":
        return MatrixElement(self.space, self.coeffs.reshape(-1, 1, 1))

    def allclose(self, other, atol=1e-10) -> bool:
        self._check(other)
        return bool(np.allclose(self.coeffs, other.coeffs, atol=atol, rtol=0.0))

    def __repr__(self):
        return f"SpaceElement({np.array2string(np.real_if_close(self.coeffs), precision=4)})"


class MatrixElement:
    """An element of ``M_n(V)`` stored as ``coeffs[b]``, the ``n x n``
    matrix multiplying basis vector ``b``."""

    __slots__ = ("space", "coeffs")

    def __init__(self, space: StarSpace, coeffs):
        c = np.asarray(coeffs)
        if c.ndim != 3 or c.shape[0] != space.dim or c.shape[1] != c.shape[2]:
            raise ValueError(f"coefficient stack must have shape ({space.dim}, n, n), got {c.shape}")
        self.space = space
        self.coeffs = c.astype(complex) if np.iscomplexobj(c) else c.astype(float)

    @classmethod
    def from_scalar(cls, A, v: SpaceElement) -> "MatrixElement":
        """``A ⊗ v`` for a scalar matrix ``A``."""
        A = np.atleast_2d(np.asarray(A))
        return cls(v.space, np.einsum("b,ij->bij", v.coeffs, A))

    @classmethod
    def from_entries(cls, space: StarSpace, entries) -> "MatrixElement":
        """Build from a nested list of SpaceElements ``[[v_11, v_12], ...]``."""
        n = len(entries)
        c = np.zeros((space.dim, n, n), dtype=complex)
        for i, row in enumerate(entries):
            if len(row) != n:
                raise ValueError("entries must form a square array")
            for j, v in enumerate(row):
                c[:, i, j] = v.coeffs
        return cls(space, np.real_if_close(c, tol=1))

    @property
    def level(self) -> int:
        return self.coeffs.shape[1]

    def entry(self, i, j) -> SpaceElement:
        return SpaceElement(self.space, self.coeffs[:, i, j])

    def _check(self, other):
        if not isinstance(other, MatrixElement) or other.space is not self.space:
            raise ValueError("elements live in different spaces")
        if other.level != self.level:
            raise ValueError(f"level mismatch: {self.level} vs {other.level}")

    def __add__(self, other):
        self._check(other)
        return MatrixElement(self.space, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check(other)
        return MatrixElement(self.space, self.coeffs - other.coeffs)

    def __neg__(self):
        return MatrixElement(self.space, -self.coeffs)

    def __mul__(self, s):
        return MatrixElement(self.space, s * self.coeffs)

    __rmul__ = __mul__

    def kron_left(self, A) -> "MatrixElement":
        """``A ⊗ x``."""
        A = np.atleast_2d(np.asarray(A))
        return MatrixElement(self.space, np.stack([np.kron(A, X) for X in self.coeffs]))

    def kron_right(self, A) -> "MatrixElement":
        """``x ⊗ A``."""
        A = np.atleast_2d(np.asarray(A))
        return MatrixElement(self.space, np.stack([np.kron(X, A) for X in self.coeffs]))

    def direct_sum(self, other) -> "MatrixElement":
        if other.space is not self.space:
            raise ValueError("elements live in different spaces")
        return MatrixElement(self.space, np.stack([direct_sum(X, Y) for X, Y in
                                                   zip(self.coeffs, other.coeffs)]))

    def conjugate(self, alpha) -> "MatrixElement":
        """``alpha^* x alpha`` for a scalar ``n x m`` matrix ``alpha``."""
        a = np.atleast_2d(np.asarray(alpha))
        if a.shape[0] != self.level:
            raise ValueError("alpha has the wrong number of rows")
        return MatrixElement(self.space, np.einsum("ij,bik,kl->bjl", a.conj(), self.coeffs, a))

    def star(self) -> "MatrixElement":
        ct = np.conj(np.transpose(self.coeffs, (0, 2, 1)))
        return MatrixElement(self.space, np.einsum("cb,bij->cij", self.space.involution, ct))

    def is_hermitian(self, atol: float = COEFF_ATOL) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.coeffs), initial=0.0)))
        return bool(np.allclose(self.star().coeffs, self.coeffs, rtol=0.0, atol=atol * scale))

    def shuffle(self, n: int, m: int) -> "MatrixElement":
        from .linalg import canonical_shuffle
        return MatrixElement(self.space, np.stack([canonical_shuffle(X, n, m) for X in self.coeffs]))

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.coeffs) or not np.any(np.imag(self.coeffs))

    def allclose(self, other, atol=1e-10) -> bool:
        self._check(other)
        return bool(np.allclose(self.coeffs, other.coeffs, atol=atol, rtol=0.0))

    def __repr__(self):
        return f"MatrixElement(level={self.level}, dim={self.space.dim})"


def as_matrix(x) -> MatrixElement:
    return x.as_matrix() if isinstance(x, SpaceElement) else x


def hvec_stack(x: MatrixElement, complex_blocks: bool) -> np.ndarray:
    """Concatenate ``hvec(X_b)`` over the basis; assumes hermitian X_b."""
    c = x.coeffs
    n = x.level
    iu = np.triu_indices(n, 1)
    diag = np.real(np.einsum("bii->bi", c))
    up = c[:, iu[0], iu[1]]
    parts = [diag, np.real(up)]
    if complex_blocks:
        parts.append(np.imag(up))
    return np.concatenate(parts, axis=1).reshape(-1)


def functional_blocks(w: np.ndarray, dim: int, level: int, complex_blocks: bool) -> np.ndarray:
    """Turn dual coordinates ``w`` (per basis, hvec layout) into matrices
    ``Y_b`` with ``phi(x) = sum_b Re tr(Y_b X_b)``."""
    h = hvec_length(level, complex_blocks)
    w = np.asarray(w).reshape(dim, h)
    dtype = complex if complex_blocks else float
    return np.stack([hvec_adjoint(w[b], level, complex_blocks) for b in range(dim)]).astype(dtype)


def pair(Y: np.ndarray, x: MatrixElement) -> float:
    """``sum_b Re tr(Y_b X_b)``."""
    return float(np.real(np.einsum("bij,bji->", Y, x.coeffs)))


# ------------------------------------------------------------------ cones


class ConeKind(enum.Enum):
    GENERATED = "Generated"
    DIAGONAL_CONCRETE = "DiagonalConcrete"
    DMAX_LIFT = "DMaxLift"
    COMPRESSION = "Compression"
    LEVEL = "Level"
    INDUCTIVE_LIMIT = "InductiveLimit"
    ARCH_CLOSURE = "ArchClosure"


class Cone:
    """Membership oracle at every matrix level."""

    kind: ConeKind

    def __init__(self, space: StarSpace, tol: Tolerance = DEFAULT_TOL):
        self.space = space
        self.tol = tol

    def membership(self, x) -> Verdict:  # pragma: no cover - abstract
        raise NotImplementedError

    def contains(self, x) -> bool:
        return self.membership(x).is_member

    def _prepare(self, x) -> MatrixElement:
        x = as_matrix(x)
        if x.space is not self.space:
            raise ValueError("element belongs to a different space")
        if not x.is_hermitian(atol=1e-9):
            raise ValueError("cone membership needs a hermitian element")
        return x


class ConicCone(Cone):
    """A cone with a lift ``x in C_n  <=>  exists PSD S with A hvec(S) = M hvec(x)``."""

    def lift(self, level: int, complex_blocks: bool):  # pragma: no cover - abstract
        raise NotImplementedError

    def affine_problem(self, base: MatrixElement, directions=(), lower=None, upper=None,
                       objective=None) -> tuple[PsdAffineProblem, object, bool]:
        """Problem for ``base + sum_k z_k directions[k]`` in the cone."""
        base = self._prepare(base)
        directions = [self._prepare(d) for d in directions]
        cplx = not (base.is_real and all(d.is_real for d in directions))
        A_blk, sizes, M = self.lift(base.level, cplx)
        b = M @ hvec_stack(base, cplx)
        C = None
        if directions:
            C = -(M @ np.column_stack([hvec_stack(d, cplx) for d in directions]))
        prob = PsdAffineProblem(sizes, A_blk, b, C, lower, upper, objective,
                                complex_blocks=cplx, tol=self.tol)
        return prob, M, cplx

    def feasible_affine(self, base, directions=(), lower=None, upper=None,
                        objective=None) -> Verdict:
        prob, M, cplx = self.affine_problem(base, directions, lower, upper, objective)
        v = psd_affine_feasible(prob)
        if v.is_non_member:
            y = v.certificate.data["y"]
            level = as_matrix(base).level
            v.certificate.data["functional"] = functional_blocks(M.T @ y, self.space.dim,
                                                                 level, cplx)
        return v

    def ground_generators(self) -> list:  # pragma: no cover - abstract
        raise NotImplementedError


class MaxCone(ConicCone):
    """The maximal matrix ordering over the cone generated by ``generators``.

    Level 1 is decided by linear programming.  Higher levels solve
    ``x = sum_j g_j ⊗ S_j`` over PSD ``S_j``.
    """

    kind = ConeKind.DMAX_LIFT

    def __init__(self, space: StarSpace, generators, tol: Tolerance = DEFAULT_TOL,
                 kind: ConeKind | None = None):
        super().__init__(space, tol)
        if not space.hermitian_basis:
            raise ValueError("cone oracles need a basis of hermitian vectors")
        gens = [g if isinstance(g, SpaceElement) else SpaceElement(space, g) for g in generators]
        for g in gens:
            if not g.is_hermitian():
                raise ValueError("generators must be hermitian")
        self.generators = gens
        self.G = np.array([np.real(g.coeffs) for g in gens], dtype=float).reshape(-1, space.dim)
        if kind is not None:
            self.kind = kind

    def ground_generators(self) -> list:
        return list(self.generators)

    def lift(self, level, complex_blocks):
        h = hvec_length(level, complex_blocks)
        A_blk = sp.kron(sp.csr_matrix(self.G.T), sp.identity(h), format="csr")
        return A_blk, [level] * len(self.generators), sp.identity(self.space.dim * h, format="csr")

    def membership(self, x) -> Verdict:
        x = self._prepare(x)
        if x.level == 1:
            v = np.real(x.coeffs[:, 0, 0])
            verdict = lp_feasible(LpProblem(self.G.T, v, np.ones(len(self.generators), bool)),
                                  self.tol)
            if verdict.is_member:
                return member(weights=verdict.certificate.data["x"],
                              residual=verdict.certificate.data["residual"])
            if verdict.is_non_member:
                y = verdict.certificate.data["y"]
                return non_member(functional=y.reshape(-1, 1, 1), value=float(y @ v))
            return verdict
        return self.feasible_affine(x)


@dataclass
class DiagonalModel:
    """A space embedded in diagonal ``m x m`` matrices: basis vector ``b``
    maps to ``diag(H[:, b])``."""

    space: StarSpace
    H: np.ndarray

    def __post_init__(self):
        self.H = np.asarray(self.H, dtype=float)
        if self.H.shape[1] != self.space.dim:
            raise ValueError("embedding has the wrong number of columns")
        if np.linalg.matrix_rank(self.H) != self.space.dim:
            raise ValueError("embedding is not injective")
        if not np.allclose(self.H @ np.real(self.space.unit_coeffs), 1.0, atol=1e-12):
            raise ValueError("unit must embed as the identity matrix")

    @property
    def size(self) -> int:
        return self.H.shape[0]

    @classmethod
    def full(cls, m: int) -> "DiagonalModel":
        """All of ``D_m`` with the standard basis."""
        space = StarSpace([f"d{i + 1}" for i in range(m)], np.ones(m))
        return cls(space, np.eye(m))

    @classmethod
    def from_generators(cls, diags, labels=None) -> tuple["DiagonalModel", list]:
        """Span of the given diagonals (rows of ``diags``); the identity must
        lie in the span.  Returns the model and the generators as elements.

        The basis is the first linearly independent subfamily, in order.
        """
        D = np.asarray(diags, dtype=float)
        labels = list(labels) if labels is not None else [f"g{i + 1}" for i in range(len(D))]
        chosen, rank = [], 0
        for i in range(len(D)):
            if np.linalg.matrix_rank(D[chosen + [i]].T) > rank:
                chosen.append(i)
                rank += 1
        H = D[chosen].T
        coords = lambda v: np.linalg.lstsq(H, v, rcond=None)[0]
        unit = coords(np.ones(D.shape[1]))
        if not np.allclose(H @ unit, 1.0, atol=1e-10):
            raise ValueError("identity is not in the span of the generators")
        space = StarSpace([labels[i] for i in chosen], _clean(unit))
        model = cls(space, H)
        gens = [SpaceElement(space, _clean(coords(d))) for d in D]
        return model, gens

    def coords(self, diag) -> SpaceElement:
        """Element whose image is ``diag(diag)`` (must be in the range)."""
        diag = np.asarray(diag, dtype=float)
        c = np.linalg.lstsq(self.H, diag, rcond=None)[0]
        if not np.allclose(self.H @ c, diag, atol=1e-10):
            raise ValueError("diagonal is not in the image of the model")
        return SpaceElement(self.space, _clean(c))

    def image(self, x) -> np.ndarray:
        """Concrete image; level-1 elements give a vector of diagonal entries,
        level-n elements give the ``m`` blocks ``B_r = sum_b H[r, b] X_b``."""
        if isinstance(x, SpaceElement):
            return self.H @ x.coeffs
        return np.einsum("rb,bij->rij", self.H, x.coeffs)

    def element(self, diag) -> SpaceElement:
        return self.coords(diag)


def _clean(c, atol=1e-12):
    c = np.array(c, dtype=float)
    c[np.abs(c) < atol] = 0.0
    r = np.round(c)
    close = np.abs(c - r) < 1e-12
    c[close] = r[close]
    return c


class DiagonalCone(ConicCone):
    """The concrete ordering of a :class:`DiagonalModel`.

    At level ``n`` the image is block diagonal with one ``n x n`` block per
    diagonal position, and membership is positivity of every block (at
    level 1 this is entrywise nonnegativity).
    """

    kind = ConeKind.DIAGONAL_CONCRETE

    def __init__(self, model: DiagonalModel, tol: Tolerance = DEFAULT_TOL):
        super().__init__(model.space, tol)
        if not model.space.hermitian_basis:
            raise ValueError("cone oracles need a basis of hermitian vectors")
        self.model = model

    def lift(self, level, complex_blocks):
        h = hvec_length(level, complex_blocks)
        m = self.model.size
        return (sp.identity(m * h, format="csr"), [level] * m,
                sp.kron(sp.csr_matrix(self.model.H), sp.identity(h), format="csr"))

    def membership(self, x) -> Verdict:
        x = self._prepare(x)
        blocks = self.model.image(x)
        worst, where, vec = np.inf, -1, None
        for r, B in enumerate(blocks):
            B = 0.5 * (B + B.conj().T)
            w, V = np.linalg.eigh(B)
            if w[0] < worst:
                worst, where, vec = float(w[0]), r, V[:, 0]
        scale = max((spectral_norm(B) for B in blocks), default=0.0)
        if worst >= -self.tol.psd_slack(scale):
            return member(kind="exact", min_eig=worst)
        Y = np.einsum("b,ij->bij", self.model.H[where], np.outer(vec, vec.conj()))
        Y = Y if np.iscomplexobj(x.coeffs) else np.real(Y)
        return non_member(kind="eigenvector", functional=Y, value=worst, position=where)

    def ground_generators(self, max_combinations: int = 200_000) -> list:
        """Extreme rays of ``{v : H v >= 0}``."""
        H = self.model.H
        m, d = H.shape
        if d == 1:
            return [self.space.unit]
        ncomb = int(np.prod([m - i for i in range(d - 1)]) / np.prod(range(1, d)))
        if ncomb > max_combinations:
            raise ValueError(f"extreme ray enumeration needs {ncomb} combinations")
        rays = []
        for rows in itertools.combinations(range(m), d - 1):
            sub = H[list(rows)]
            if np.linalg.matrix_rank(sub) != d - 1:
                continue
            ray = np.linalg.svd(sub)[2][-1]
            img = H @ ray
            if np.all(img >= -1e-10):
                pass
            elif np.all(img <= 1e-10):
                ray = -ray
            else:
                continue
            ray = ray / np.max(np.abs(H @ ray))
            if not any(np.allclose(ray, r, atol=1e-9) for r in rays):
                rays.append(ray)
        return [SpaceElement(self.space, _clean(r)) for r in rays]


class ArchimedeanClosure(Cone):
    """``x + eps (I ⊗ e)`` in the inner cone for every ``eps`` of the schedule."""

    kind = ConeKind.ARCH_CLOSURE

    def __init__(self, cone: Cone, schedule=DEFAULT_SCHEDULE):
        super().__init__(cone.space, cone.tol)
        _check_schedule(schedule)
        self.cone = cone
        self.schedule = tuple(schedule)

    def membership(self, x) -> Verdict:
        return archimedean_membership(self.cone, x, self.schedule)


def _check_schedule(schedule):
    s = list(schedule)
    if not s:
        raise ValueError("schedule must be nonempty")
    if any(e <= 0 for e in s) or any(a <= b for a, b in zip(s, s[1:])):
        raise ValueError("schedule must be positive and strictly decreasing")


# -------------------------------------------------------------- operations


def dmax_membership(space: StarSpace, gens, x, tol: Tolerance = DEFAULT_TOL) -> Verdict:
    """Is ``x`` in the maximal matrix ordering over the cone spanned by ``gens``?"""
    return MaxCone(space, gens, tol).membership(x)


def archimedean_membership(cone: Cone, x, schedule=DEFAULT_SCHEDULE) -> Verdict:
    _check_schedule(schedule)
    x = as_matrix(x)
    unit = cone.space.unit_matrix(x.level)
    saw_unknown = None
    for eps in schedule:
        v = cone.membership(x + eps * unit)
        if v.is_non_member:
            v.certificate.data["eps"] = eps
            v.note = f"fails at eps={eps:g}"
            return v
        if v.is_unknown and saw_unknown is None:
            saw_unknown = eps
    if saw_unknown is not None:
        return unknown(note=f"inner oracle undecided at eps={saw_unknown:g}")
    return member(kind="schedule", schedule=list(schedule),
                  note="member within schedule")


def order_norm(space: StarSpace, cone: Cone, v: SpaceElement, tol: float = 1e-8) -> float:
    """``inf { t > 0 : t e ± v in C }`` by bisection."""
    if not v.is_hermitian():
        raise ValueError("order norm needs a hermitian element")
    e = space.unit

    def ok(t):
        return cone.contains(t * e - v) and cone.contains(t * e + v)

    gens = getattr(cone, "generators", None)
    gscale = max((float(np.max(np.abs(g.coeffs))) for g in gens), default=1.0) if gens else 1.0
    hi = 1.0 + float(np.sum(np.abs(v.coeffs))) * max(gscale, 1.0)
    tries = 0
    while not ok(hi):
        hi *= 2.0
        tries += 1
        if tries > 60:
            raise RuntimeError("could not bracket the order norm; is the unit interior?")
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


@dataclass
class Quotient:
    """Quotient space plus the coefficient map ``R`` from the ambient space."""

    space: StarSpace
    projection: np.ndarray
    pivots: list = field(default_factory=list)

    def project(self, v) -> SpaceElement:
        c = v.coeffs if isinstance(v, SpaceElement) else np.asarray(v)
        return SpaceElement(self.space, self.projection @ c)


def quotient_by_subspace(space: StarSpace, j_basis, rank_tol: float = 1e-10) -> Quotient:
    """``V / J`` with the induced involution and unit.

    The quotient basis consists of cosets of ambient basis vectors chosen
    greedily (in order) to complete a basis of ``J``.
    """
    d = space.dim
    J = [np.asarray(v.coeffs if isinstance(v, SpaceElement) else v, dtype=complex) for v in j_basis]
    Jm = np.column_stack(J) if J else np.zeros((d, 0), dtype=complex)
    r = np.linalg.matrix_rank(Jm, tol=rank_tol) if J else 0
    if r:
        starJ = space.involution @ np.conj(Jm)
        if np.linalg.matrix_rank(np.hstack([Jm, starJ]), tol=rank_tol) != r:
            raise ValueError("subspace is not invariant under the involution")
        # orthonormal basis of span(J)
        U, s, _ = np.linalg.svd(Jm, full_matrices=False)
        Jb = U[:, :r]
    else:
        Jb = np.zeros((d, 0), dtype=complex)
    pivots, cur = [], Jb
    for i in range(d):
        if cur.shape[1] == d:
            break
        cand = np.hstack([cur, np.eye(d)[:, [i]]])
        if np.linalg.matrix_rank(cand, tol=rank_tol) > cur.shape[1]:
            cur = cand
            pivots.append(i)
    M = cur
    Minv = np.linalg.inv(M)
    q = len(pivots)
    R = Minv[r:, :]
    if np.allclose(R.imag, 0, atol=1e-12):
        R = R.real
    R = np.where(np.abs(R) < 1e-12, 0.0, R)
    unit = R @ space.unit_coeffs
    if np.max(np.abs(unit), initial=0.0) < 1e-10:
        raise ValueError("the unit lies in the subspace; quotient would be degenerate")
    Mq = np.eye(d)[:, pivots]
    Tq = np.real(R @ space.involution @ Mq)
    quot = StarSpace([space.labels[i] for i in pivots], np.real_if_close(unit), Tq)
    return Quotient(quot, R, pivots)


def diagonal_cone(model: DiagonalModel, tol: Tolerance = DEFAULT_TOL) -> DiagonalCone:
    return DiagonalCone(model, tol)
