"""The universal nonsignalling space and its cones.

Generators ``Q(a,b|x,y)`` of ``C^(n^2 k^2)`` are indexed lexicographically by
``(x, y, a, b)`` (0-based internally, 1-based in labels).  Quotienting by the
span of the relation vectors

    F(x,y|x',y') = sum_ab Q(a,b|x,y) - sum_ab Q(a,b|x',y')
    G(a|x,z,w)   = sum_c Q(a,c|x,z) - sum_c Q(a,c|x,w)
    H(b|y,z,w)   = sum_c Q(c,b|z,y) - sum_c Q(c,b|w,y)

gives ``V_ns`` of dimension ``(n(k-1)+1)^2``.  Coordinates are taken against
the basis made of the unit, ``Q(a,b|x,y)`` for ``a, b < k``, and the marginals
``E(a|x)``, ``F(b|y)`` for ``a, b < k``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .compression import (DEFAULT_PARAMS, BudgetExceeded, ContractionTuple, ScheduleParams,
                          inductive_membership)
from .conic import Verdict, member, non_member, unknown
from .linalg import DEFAULT_TOL, Tolerance, exact_rank
from .ordered import (Cone, ConeKind, DiagonalModel, MatrixElement, MaxCone, SpaceElement,
                      StarSpace, as_matrix, quotient_by_subspace)

RELATION_ATOL = 1e-12


@dataclass(frozen=True)
class Scenario:
    n: int
    k: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one input (n >= 1)")
        if self.k < 2:
            raise ValueError("need at least two outputs (k >= 2)")

    @property
    def n_generators(self) -> int:
        return self.n ** 2 * self.k ** 2

    @property
    def ns_dim(self) -> int:
        return (self.n * (self.k - 1) + 1) ** 2

    def index(self, x: int, y: int, a: int, b: int) -> int:
        """Position of ``Q(a,b|x,y)`` (0-based arguments)."""
        n, k = self.n, self.k
        return ((x * n + y) * k + a) * k + b

    def tuples(self):
        """All ``(x, y, a, b)`` in generator order."""
        return itertools.product(range(self.n), range(self.n), range(self.k), range(self.k))

    def as_dict(self):
        return {"n": self.n, "k": self.k}


def generator_label(x, y, a, b) -> str:
    return f"Q({a + 1},{b + 1}|{x + 1},{y + 1})"


@dataclass(frozen=True)
class Relation:
    name: str
    vector: np.ndarray


def relation_vectors(s: Scenario) -> list:
    """Every F, G and H vector (with repetitions and zeros), as coefficient
    vectors over the generators."""
    n, k, N = s.n, s.k, s.n_generators
    out = []

    def block(x, y):
        v = np.zeros(N)
        for a in range(k):
            for b in range(k):
                v[s.index(x, y, a, b)] = 1.0
        return v

    for x, y, xp, yp in itertools.product(range(n), repeat=4):
        if (x, y) != (xp, yp):
            out.append(Relation(f"F({x + 1},{y + 1}|{xp + 1},{yp + 1})", block(x, y) - block(xp, yp)))
    for a, x, z, w in itertools.product(range(k), range(n), range(n), range(n)):
        if z != w:
            v = np.zeros(N)
            for c in range(k):
                v[s.index(x, z, a, c)] += 1.0
                v[s.index(x, w, a, c)] -= 1.0
            out.append(Relation(f"G({a + 1}|{x + 1},{z + 1},{w + 1})", v))
    for b, y, z, w in itertools.product(range(k), range(n), range(n), range(n)):
        if z != w:
            v = np.zeros(N)
            for c in range(k):
                v[s.index(z, y, c, b)] += 1.0
                v[s.index(w, y, c, b)] -= 1.0
            out.append(Relation(f"H({b + 1}|{y + 1},{z + 1},{w + 1})", v))
    return out


def relation_matrix(s: Scenario) -> np.ndarray:
    rels = relation_vectors(s)
    if not rels:
        return np.zeros((0, s.n_generators))
    return np.vstack([r.vector for r in rels])


@dataclass
class NsSpace:
    """``V_ns`` with coordinates against the basis ``B``.

    ``to_coords`` maps coefficient vectors over the generators to
    B-coordinates; ``generator_coords[i]`` is ``Q_ns`` of generator ``i``;
    ``basis_lift`` holds a generator-space representative of each element of
    ``B`` (one column per basis element).
    """

    scenario: Scenario
    space: StarSpace
    to_coords: np.ndarray
    generator_coords: np.ndarray
    basis_lift: np.ndarray
    relation_rank: int

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def unit(self) -> SpaceElement:
        return self.space.unit

    def Q(self, a, b, x, y) -> SpaceElement:
        """``Q_ns(a,b|x,y)`` (1-based arguments)."""
        return SpaceElement(self.space, self.generator_coords[self.scenario.index(x - 1, y - 1, a - 1, b - 1)])

    def E(self, a, x) -> SpaceElement:
        """Alice marginal ``E(a|x)`` (1-based)."""
        s = self.scenario
        return SpaceElement(self.space, sum(self.generator_coords[s.index(x - 1, 0, a - 1, c)]
                                            for c in range(s.k)))

    def F(self, b, y) -> SpaceElement:
        """Bob marginal ``F(b|y)`` (1-based)."""
        s = self.scenario
        return SpaceElement(self.space, sum(self.generator_coords[s.index(0, y - 1, c, b - 1)]
                                            for c in range(s.k)))

    def generators(self) -> list:
        return [SpaceElement(self.space, g) for g in self.generator_coords]

    def from_generator_coeffs(self, c) -> SpaceElement:
        return SpaceElement(self.space, self.to_coords @ np.asarray(c))


def _basis_lift(s: Scenario) -> tuple[list, np.ndarray]:
    n, k, N = s.n, s.k, s.n_generators
    labels, cols = [], []

    def vec(entries):
        v = np.zeros(N)
        for idx in entries:
            v[idx] += 1.0
        return v

    labels.append("e")
    cols.append(vec(s.index(0, 0, a, b) for a in range(k) for b in range(k)))
    for x, y, a, b in s.tuples():
        if a < k - 1 and b < k - 1:
            labels.append(generator_label(x, y, a, b))
            cols.append(vec([s.index(x, y, a, b)]))
    for x in range(n):
        for a in range(k - 1):
            labels.append(f"E({a + 1}|{x + 1})")
            cols.append(vec(s.index(x, 0, a, c) for c in range(k)))
    for y in range(n):
        for b in range(k - 1):
            labels.append(f"F({b + 1}|{y + 1})")
            cols.append(vec(s.index(0, y, c, b) for c in range(k)))
    return labels, np.column_stack(cols)


def build_ns_space(s: Scenario) -> NsSpace:
    """Quotient of ``C^(n^2 k^2)`` by the relations, rebased onto ``B``."""
    N = s.n_generators
    ambient = StarSpace([generator_label(*t) for t in s.tuples()],
                        np.array([1.0 if (t[0], t[1]) == (0, 0) else 0.0 for t in s.tuples()]))
    rel = relation_matrix(s)
    rel_nonzero = [r for r in rel if np.any(r)]
    quot = quotient_by_subspace(ambient, rel_nonzero)
    R = np.real(quot.projection)
    labels, lift = _basis_lift(s)
    Bq = R @ lift
    if Bq.shape[0] != Bq.shape[1] or np.linalg.matrix_rank(Bq) != Bq.shape[0]:
        raise RuntimeError("basis B does not match the quotient dimension")
    to_coords = np.linalg.solve(Bq, R)
    to_coords[np.abs(to_coords) < 1e-12] = 0.0
    to_coords = np.round(to_coords, 12)
    gens = to_coords.T.copy()
    unit = np.zeros(len(labels))
    unit[0] = 1.0
    # the involution conjugates generator coefficients; B is made of
    # generator sums, so it is the identity in B-coordinates
    T_B = np.linalg.solve(Bq, np.real(quot.space.involution) @ Bq)
    if not np.allclose(T_B, np.eye(len(labels)), atol=1e-10):
        raise RuntimeError("involution is not well defined on the quotient")
    space = StarSpace(labels, unit)
    rank = N - space.dim
    return NsSpace(s, space, to_coords, gens, lift, rank)


@dataclass
class CommutativeModel:
    """The diagonal model on ``(C^k)^{⊗2n}``: ``Q(a,b|x,y)`` is the
    projection onto outcomes with Alice's ``x``-th register ``a`` and Bob's
    ``y``-th register ``b``."""

    scenario: Scenario
    model: DiagonalModel
    diagonals: np.ndarray          # (n^2 k^2, k^(2n)) 0/1 images of the generators
    generators: list               # SpaceElements in model.space

    def E_diag(self, a, x):
        s = self.scenario
        return sum(self.diagonals[s.index(x, 0, a, c)] for c in range(s.k))

    def F_diag(self, b, y):
        s = self.scenario
        return sum(self.diagonals[s.index(0, y, c, b)] for c in range(s.k))


def commutative_diagonals(s: Scenario, budget: int = 4096) -> np.ndarray:
    n, k = s.n, s.k
    size = k ** (2 * n)
    if size > budget:
        raise BudgetExceeded(f"model size {size} exceeds budget {budget}")
    # a diagonal position is a pair of output tables (alpha, beta), alpha[x] = a
    outcomes = np.array(list(itertools.product(range(k), repeat=2 * n)))
    alice, bob = outcomes[:, :n], outcomes[:, n:]
    D = np.zeros((s.n_generators, size))
    for x, y, a, b in s.tuples():
        D[s.index(x, y, a, b)] = (alice[:, x] == a) & (bob[:, y] == b)
    return D


def build_commutative_model(s: Scenario, budget: int = 4096) -> CommutativeModel:
    D = commutative_diagonals(s, budget)
    labels = [generator_label(*t) for t in s.tuples()]
    model, gens = DiagonalModel.from_generators(D, labels)
    return CommutativeModel(s, model, D, gens)


@dataclass
class LinearMap:
    """Linear map between coefficient spaces: ``w = matrix @ v``."""

    source: StarSpace
    target: StarSpace
    matrix: np.ndarray

    def __call__(self, v):
        if isinstance(v, SpaceElement):
            return SpaceElement(self.target, self.matrix @ v.coeffs)
        v = as_matrix(v)
        return MatrixElement(self.target, np.einsum("cb,bij->cij", self.matrix, v.coeffs))

    @property
    def rank(self) -> int:
        return int(np.linalg.matrix_rank(self.matrix))

    def is_unital(self, atol=1e-10) -> bool:
        return bool(np.allclose(self.matrix @ self.source.unit_coeffs, self.target.unit_coeffs, atol=atol))


def universal_map(ns: NsSpace, targets) -> LinearMap:
    """The linear map on ``V_ns`` sending ``Q_ns(a,b|x,y)`` to ``targets[i]``
    (generator order).  Raises if the targets violate a relation."""
    s = ns.scenario
    targets = list(targets)
    if len(targets) != s.n_generators:
        raise ValueError(f"expected {s.n_generators} targets, got {len(targets)}")
    W = targets[0].space
    Tg = np.column_stack([t.coeffs for t in targets])
    for rel in relation_vectors(s):
        img = Tg @ rel.vector
        if np.max(np.abs(img), initial=0.0) > RELATION_ATOL:
            raise ValueError(f"targets violate relation {rel.name} "
                             f"(residual {np.max(np.abs(img)):.3g})")
    M = Tg @ ns.basis_lift
    return LinearMap(ns.space, W, np.real_if_close(M))


def dns_cone(ns: NsSpace, tol: Tolerance = DEFAULT_TOL) -> MaxCone:
    """Cone generated by the ``Q_ns`` with its maximal matrix ordering."""
    return MaxCone(ns.space, ns.generators(), tol)


def qc_tuple(ns: NsSpace) -> ContractionTuple:
    """All generators, lexicographic in ``(x, y, a, b)``, as contractions."""
    return ContractionTuple(ns.space, ns.generators(), dns_cone(ns))


class QcCone(Cone):
    """Ground level of the inductive limit built from all generators.

    Shortcuts, each sound: members of ``D_ns`` are members; an element whose
    image in the commutative model has a negative entry is rejected by the
    corresponding deterministic state.  Everything else goes to the level
    scan, which reports budget exhaustion as Unknown.
    """

    kind = ConeKind.INDUCTIVE_LIMIT

    def __init__(self, ns: NsSpace, L_max: int = 1, params: ScheduleParams = DEFAULT_PARAMS,
                 use_shortcuts: bool = True):
        super().__init__(ns.space, params.tol)
        self.ns = ns
        self.L_max = L_max
        self.params = params
        self.use_shortcuts = use_shortcuts
        self.dns = dns_cone(ns, params.tol)
        self.tuple = qc_tuple(ns)
        self._comm = None

    def _commutative(self):
        if self._comm is None:
            comm = build_commutative_model(self.ns.scenario, self.params.budget_rows)
            self._comm = (comm, universal_map(self.ns, comm.generators))
        return self._comm

    def enumeration(self) -> list:
        return [generator_label(*t) for t in self.ns.scenario.tuples()]

    def membership(self, x) -> Verdict:
        x = self._prepare(x)
        if x.level != 1:
            raise ValueError("only the ground level is supported")
        meta = dict(scenario=self.ns.scenario.as_dict(), enumeration=self.enumeration())
        if self.use_shortcuts:
            v = self.dns.membership(x)
            if v.is_member:
                return member(kind="dns_member", L=1, note="member of D_ns, hence at L=1",
                              weights=v.certificate.data["weights"], **meta)
            try:
                comm, phi = self._commutative()
            except BudgetExceeded:
                comm = None
            if comm is not None:
                img = comm.model.H @ np.real(phi(x.entry(0, 0)).coeffs)
                r = int(np.argmin(img))
                if img[r] < -self.params.tol.psd_slack(float(np.max(np.abs(img)))):
                    # the deterministic strategy at position r is a state on D_qc
                    state = comm.diagonals[:, r]
                    return non_member(kind="deterministic_state", state=state, value=float(img[r]),
                                      position=r, note="negative under a deterministic strategy",
                                      **meta)
        try:
            v = inductive_membership(self.dns, self.tuple, x, self.L_max, self.params)
        except BudgetExceeded as exc:
            return unknown(kind="budget", note=str(exc), **meta)
        v.certificate.data.update(meta)
        return v


def dqc_cone(ns: NsSpace, L_max: int = 1, params: ScheduleParams = DEFAULT_PARAMS,
             use_shortcuts: bool = True) -> QcCone:
    return QcCone(ns, L_max, params, use_shortcuts)
