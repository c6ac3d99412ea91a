"""Bipartite correlations ``p(a,b|x,y)`` and their classification.

Arrays are indexed ``p[x, y, a, b]`` with 0-based indices; files and labels
use 1-based indices.  Flattening ``p`` in C order gives the generator order
of :mod:`aouqc.nonsignalling`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .compression import (DEFAULT_PARAMS, BudgetExceeded, ScheduleParams, build_P, build_Q,
                          level_membership)
from .conic import (LpProblem, PsdAffineProblem, Verdict, lp_feasible, lp_optimize, member,
                    non_member, psd_affine_feasible, unknown)
from .nonsignalling import NsSpace, Scenario, dns_cone, qc_tuple, relation_vectors
from .ordered import SpaceElement

NORMALIZATION_ATOL = 1e-9
VERTEX_BUDGET = 4096


# -------------------------------------------------------------- data model


@dataclass
class Correlation:
    scenario: Scenario
    p: np.ndarray

    def __post_init__(self):
        s = self.scenario
        self.p = np.asarray(self.p, dtype=float)
        if self.p.shape != (s.n, s.n, s.k, s.k):
            raise ValueError(f"expected shape {(s.n, s.n, s.k, s.k)}, got {self.p.shape}")

    @property
    def vector(self) -> np.ndarray:
        return self.p.reshape(-1)

    @classmethod
    def from_vector(cls, s: Scenario, v) -> "Correlation":
        return cls(s, np.asarray(v, dtype=float).reshape(s.n, s.n, s.k, s.k))

    def __add__(self, other):
        return Correlation(self.scenario, self.p + other.p)

    def __mul__(self, c):
        return Correlation(self.scenario, c * self.p)

    __rmul__ = __mul__

    def alice_marginals(self) -> np.ndarray:
        """``[x, y, a] -> sum_b p(a,b|x,y)``."""
        return self.p.sum(axis=3)

    def bob_marginals(self) -> np.ndarray:
        """``[x, y, b] -> sum_a p(a,b|x,y)``."""
        return self.p.sum(axis=2)


@dataclass
class BellFunctional:
    scenario: Scenario
    c: np.ndarray

    def __post_init__(self):
        s = self.scenario
        self.c = np.asarray(self.c, dtype=float)
        if self.c.shape != (s.n, s.n, s.k, s.k):
            raise ValueError(f"expected shape {(s.n, s.n, s.k, s.k)}, got {self.c.shape}")
        if not np.all(np.isfinite(self.c)):
            raise ValueError("functional has non-finite coefficients")

    @property
    def vector(self) -> np.ndarray:
        return self.c.reshape(-1)


def uniform(s: Scenario) -> Correlation:
    return Correlation(s, np.full((s.n, s.n, s.k, s.k), 1.0 / s.k ** 2))


def pr_box(s: Scenario = Scenario(2, 2)) -> Correlation:
    """``p = 1/2`` exactly when ``a xor b = x y`` (0-based)."""
    if (s.n, s.k) != (2, 2):
        raise ValueError("the PR box is defined for two inputs and two outputs")
    return _pr_variant(0, 0, 0)


def _pr_variant(alpha, beta, gamma) -> Correlation:
    p = np.zeros((2, 2, 2, 2))
    for x, y, a, b in itertools.product(range(2), repeat=4):
        if a ^ b == (x * y) ^ (alpha * x) ^ (beta * y) ^ gamma:
            p[x, y, a, b] = 0.5
    return Correlation(Scenario(2, 2), p)


def deterministic(s: Scenario, alice, bob) -> Correlation:
    """Outputs ``alice[x]`` and ``bob[y]`` (0-based)."""
    p = np.zeros((s.n, s.n, s.k, s.k))
    for x in range(s.n):
        for y in range(s.n):
            p[x, y, alice[x], bob[y]] = 1.0
    return Correlation(s, p)


def deterministic_vertices(s: Scenario, budget: int = VERTEX_BUDGET) -> np.ndarray:
    """All ``k^(2n)`` deterministic correlations as rows (generator order)."""
    count = s.k ** (2 * s.n)
    if count > budget:
        raise BudgetExceeded(f"{count} deterministic strategies exceed the budget of {budget}")
    rows = []
    for table in itertools.product(range(s.k), repeat=2 * s.n):
        rows.append(deterministic(s, table[:s.n], table[s.n:]).vector)
    return np.array(rows)


def random_valid(s: Scenario, rng: np.random.Generator) -> Correlation:
    """Dirichlet-uniform distribution per ``(x, y)`` block."""
    p = rng.dirichlet(np.ones(s.k ** 2), size=(s.n, s.n)).reshape(s.n, s.n, s.k, s.k)
    return Correlation(s, p)


def random_nonsignalling(s: Scenario, rng: np.random.Generator, n_terms: int = 4) -> Correlation:
    """Random mixture of deterministic strategies and (for two inputs and two
    outputs) PR-type boxes."""
    parts = []
    for _ in range(n_terms):
        if (s.n, s.k) == (2, 2) and rng.random() < 0.5:
            parts.append(_pr_variant(*rng.integers(0, 2, size=3)))
        else:
            table = rng.integers(0, s.k, size=2 * s.n)
            parts.append(deterministic(s, table[:s.n], table[s.n:]))
    w = rng.dirichlet(np.ones(n_terms))
    return Correlation(s, sum(wi * c.p for wi, c in zip(w, parts)))


# --------------------------------------------------------------- file format


def _parse_table(text: str, what: str):
    scenario, entries = None, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if scenario is None:
            if fields[0] != "scenario" or len(fields) != 3:
                raise ValueError(f"line {lineno}: expected header 'scenario n k'")
            try:
                scenario = Scenario(int(fields[1]), int(fields[2]))
            except ValueError as exc:
                raise ValueError(f"line {lineno}: bad scenario: {exc}") from None
            continue
        if len(fields) != 5:
            raise ValueError(f"line {lineno}: expected 'x y a b value', got {len(fields)} fields")
        try:
            x, y, a, b = (int(f) for f in fields[:4])
            val = float(fields[4])
        except ValueError:
            raise ValueError(f"line {lineno}: could not parse numbers in {line!r}") from None
        for name, v, hi in (("x", x, scenario.n), ("y", y, scenario.n),
                            ("a", a, scenario.k), ("b", b, scenario.k)):
            if not 1 <= v <= hi:
                raise ValueError(f"line {lineno}: field {name}={v} out of range 1..{hi}")
        key = (x - 1, y - 1, a - 1, b - 1)
        if key in entries:
            raise ValueError(f"line {lineno}: duplicate entry for {(x, y, a, b)}")
        entries[key] = val
    if scenario is None:
        raise ValueError(f"empty {what} file")
    arr = np.zeros((scenario.n, scenario.n, scenario.k, scenario.k))
    for key, val in entries.items():
        arr[key] = val
    return scenario, arr


def _format_table(s: Scenario, arr: np.ndarray) -> str:
    lines = [f"scenario {s.n} {s.k}"]
    for x, y, a, b in s.tuples():
        v = arr[x, y, a, b]
        if v != 0:
            lines.append(f"{x + 1} {y + 1} {a + 1} {b + 1} {float(v)!r}")
    return "\n".join(lines) + "\n"


def parse_correlation(text: str) -> Correlation:
    s, arr = _parse_table(text, "correlation")
    return Correlation(s, arr)


def parse_functional(text: str) -> BellFunctional:
    s, arr = _parse_table(text, "functional")
    return BellFunctional(s, arr)


def load_correlation(path) -> Correlation:
    with open(path) as fh:
        return parse_correlation(fh.read())


def load_functional(path) -> BellFunctional:
    with open(path) as fh:
        return parse_functional(fh.read())


def format_correlation(p: Correlation) -> str:
    return _format_table(p.scenario, p.p)


def format_functional(f: BellFunctional) -> str:
    return _format_table(f.scenario, f.c)


# --------------------------------------------------------------- classifiers


def validate(p: Correlation, atol: float = NORMALIZATION_ATOL) -> list:
    """Empty list when ``p`` is a correlation, else one message per violation."""
    errors = []
    s = p.scenario
    for x, y, a, b in s.tuples():
        if p.p[x, y, a, b] < 0:
            errors.append(f"negative entry p({a + 1},{b + 1}|{x + 1},{y + 1}) = {p.p[x, y, a, b]:g}")
    sums = p.p.sum(axis=(2, 3))
    for x in range(s.n):
        for y in range(s.n):
            if abs(sums[x, y] - 1.0) > atol:
                errors.append(f"block (x={x + 1}, y={y + 1}) sums to {sums[x, y]:.12g}, not 1")
    return errors


def is_nonsignalling_direct(p: Correlation, tol: float = 1e-9) -> tuple[bool, float]:
    """Check that Alice's marginal ignores ``y`` and Bob's ignores ``x``.

    Returns the verdict and the largest marginal discrepancy.
    """
    pa = p.alice_marginals()   # [x, y, a]
    pb = p.bob_marginals()     # [x, y, b]
    va = float(np.max(pa.max(axis=1) - pa.min(axis=1), initial=0.0))
    vb = float(np.max(pb.max(axis=0) - pb.min(axis=0), initial=0.0))
    worst = max(va, vb)
    return worst <= tol, worst


def state_vector(p: Correlation, ns: NsSpace) -> np.ndarray:
    """Values of the functional ``Q_ns -> p`` on the basis of ``V_ns``."""
    return ns.basis_lift.T @ p.vector


def ns_state_membership(p: Correlation, ns: NsSpace, tol: float = 1e-9) -> Verdict:
    """Does ``Q_ns(a,b|x,y) -> p(a,b|x,y)`` define a state on ``V_ns``?

    Well-definedness is checked twice: every relation vector must annihilate
    ``p``, and the functional rebuilt from its basis values must reproduce
    ``p`` on every generator.  Positivity on the cone generated by the
    ``Q_ns`` is nonnegativity of ``p``, and unitality is normalization.
    """
    if p.scenario != ns.scenario:
        raise ValueError(f"scenario mismatch: {p.scenario} vs {ns.scenario}")
    vec = p.vector
    worst_rel, worst_name = 0.0, None
    for rel in relation_vectors(ns.scenario):
        r = abs(float(rel.vector @ vec))
        if r > worst_rel:
            worst_rel, worst_name = r, rel.name
    state = state_vector(p, ns)
    rebuilt = ns.generator_coords @ state
    recon = float(np.max(np.abs(rebuilt - vec), initial=0.0))
    neg = float(-min(vec.min(), 0.0))
    unit = abs(float(state[0]) - 1.0)
    if worst_rel > tol:
        return non_member(kind="relation", relation=worst_name, residual=worst_rel,
                          note=f"relation {worst_name} not annihilated")
    if recon > tol:
        return non_member(kind="reconstruction", residual=recon,
                          note="functional does not descend to the quotient")
    if neg > tol:
        return non_member(kind="positivity", value=-neg, note="negative value on a generator")
    if unit > tol:
        return non_member(kind="unitality", value=float(state[0]), note="state is not unital")
    return member(kind="state", state=state, labels=list(ns.space.labels))


def _normalized_separator(s: Scenario, f: np.ndarray, vertices: np.ndarray, p_vec: np.ndarray):
    """Rescale a separating functional so its local range is ``[-2, 2]``."""
    vals = vertices @ f
    fmax, fmin = float(vals.max()), float(vals.min())
    u = np.full_like(f, 1.0 / s.n ** 2)  # u . q = 1 for every correlation q
    if fmax - fmin < 1e-12:
        return f, fmax, float(f @ p_vec)
    g = (4.0 / (fmax - fmin)) * (f - 0.5 * (fmax + fmin) * u)
    return g, float((vertices @ g).max()), float(g @ p_vec)


def is_local(p: Correlation, tol: float = 1e-9, budget: int = VERTEX_BUDGET) -> Verdict:
    """Convex-hull membership over deterministic strategies.

    Member carries the convex weights.  NonMember carries a Bell functional
    whose local maximum is 2 and whose value at ``p`` exceeds 2.
    """
    s = p.scenario
    V = deterministic_vertices(s, budget)
    A = np.vstack([V.T, np.ones(len(V))])
    b = np.concatenate([p.vector, [1.0]])
    v = lp_feasible(LpProblem(A, b, np.ones(len(V), dtype=bool)))
    if v.is_member:
        w = v.certificate.data["x"]
        support = [int(i) for i in np.flatnonzero(w > 1e-12)]
        return member(kind="convex_weights", weights=w, support=support)
    if v.is_non_member:
        y = v.certificate.data["y"]
        f = -y[:-1]
        g, local_max, value = _normalized_separator(s, f, V, p.vector)
        if value > local_max:
            return non_member(kind="bell_functional", functional=g.reshape(p.p.shape),
                              local_max=local_max, value=value)
    return unknown(note="local LP undecided")


def bell_value(p: Correlation, f: BellFunctional) -> float:
    if p.scenario != f.scenario:
        raise ValueError("scenario mismatch")
    return float(np.sum(p.p * f.c))


def chsh(s: Scenario = Scenario(2, 2)) -> BellFunctional:
    """Sum of correlators with the ``x = y = 2`` term negated."""
    if (s.n, s.k) != (2, 2):
        raise ValueError("CHSH needs two inputs and two outputs")
    c = np.zeros((2, 2, 2, 2))
    for x, y, a, b in itertools.product(range(2), repeat=4):
        c[x, y, a, b] = (-1.0) ** (a ^ b ^ (x * y))
    return BellFunctional(s, c)


def ns_polytope_constraints(s: Scenario):
    rel = np.array([r.vector for r in relation_vectors(s)]) if s.n > 1 else np.zeros((0, s.n_generators))
    blocks = np.zeros((s.n * s.n, s.n_generators))
    for x, y, a, b in s.tuples():
        blocks[x * s.n + y, s.index(x, y, a, b)] = 1.0
    A = np.vstack([rel, blocks])
    b = np.concatenate([np.zeros(len(rel)), np.ones(s.n * s.n)])
    return A, b


def maximize_over_ns(f: BellFunctional) -> tuple[float, Correlation]:
    s = f.scenario
    A, b = ns_polytope_constraints(s)
    val, x = lp_optimize(f.vector, A_eq=A, b_eq=b, bounds=(0, None), maximize=True)
    return val, Correlation.from_vector(s, np.clip(x, 0.0, None))


def maximize_over_local(f: BellFunctional, budget: int = VERTEX_BUDGET) -> tuple[float, Correlation]:
    s = f.scenario
    V = deterministic_vertices(s, budget)
    vals = V @ f.vector
    i = int(np.argmax(vals))
    return float(vals[i]), Correlation.from_vector(s, V[i])


# ------------------------------------------------------- quantum commuting outer


def _level_rows(ns: NsSpace, L: int) -> int:
    return 2 ** (ns.scenario.n_generators * L)


def adversarial_probe(ns: NsSpace, state: np.ndarray, L: int, params: ScheduleParams = DEFAULT_PARAMS,
                      box: float = 10.0):
    """Minimize ``state . x`` over ``x`` whose level-``L`` problem is feasible
    at the smallest scheduled eps, normalized by the uniform state and with
    coordinates in ``[-box, box]``.  Returns the minimizer or ``None``."""
    s = ns.scenario
    if _level_rows(ns, L) > params.budget_rows:
        raise BudgetExceeded(f"level {L} needs {_level_rows(ns, L)} rows")
    cone = dns_cone(ns, params.tol)
    tup = qc_tuple(ns).repeated(L)
    NL = tup.N
    eps = params.eps[-1]
    space = ns.space
    base = space.zero(2 ** NL)
    for k in range(1, NL + 1):
        base = base + eps * build_P(tup, k, NL)
    dirs = [space.basis_element(i).as_matrix().kron_right(np.ones((2 ** NL, 2 ** NL)))
            for i in range(space.dim)]
    dirs += [build_Q(tup, k, NL) for k in range(1, NL + 1)]
    d = space.dim
    lower = np.concatenate([np.full(d, -box), np.zeros(NL)])
    upper = np.concatenate([np.full(d, box), np.full(NL, params.t_max)])
    ref = state_vector(uniform(s), ns)
    objective = np.concatenate([state, np.zeros(NL)])
    prob, _, _ = cone.affine_problem(base, dirs, lower, upper, objective)
    extra = sp.csr_matrix((1, prob.A.shape[1]))
    C = sp.vstack([prob.C, sp.csr_matrix(np.concatenate([ref, np.zeros(NL)])[None, :])])
    A = sp.vstack([prob.A, extra])
    b = np.concatenate([prob.b, [1.0]])
    prob2 = PsdAffineProblem(prob.block_sizes, A, b, C, lower, upper, objective,
                             complex_blocks=prob.complex_blocks, tol=prob.tol)
    v = psd_affine_feasible(prob2)
    if not v.is_member:
        return None
    z = v.certificate.data["z"]
    return SpaceElement(space, z[:d])


def qc_outer_membership(p: Correlation, ns: NsSpace, L: int = 1, params: ScheduleParams = DEFAULT_PARAMS,
                        shortcut_local: bool = True, tol: float = 1e-9, n_random: int = 20,
                        seed: int = 0) -> Verdict:
    """Test the state of ``p`` against the level-``L`` pullback cone.

    Member means "nonnegative on every level-``L`` member probed" and is
    reported as Member-at-L.  NonMember exhibits a level-``L`` member on
    which the state is negative, which excludes ``p`` from the quantum
    commuting set.  Local correlations are accepted directly when
    ``shortcut_local`` is set.
    """
    errors = validate(p)
    if errors:
        raise ValueError("not a correlation: " + "; ".join(errors))
    ok, worst = is_nonsignalling_direct(p, tol)
    if not ok:
        raise ValueError(f"correlation is signalling (violation {worst:.3g})")
    meta = dict(L=L, scenario=ns.scenario.as_dict())
    if shortcut_local:
        try:
            loc = is_local(p, tol)
        except BudgetExceeded:
            loc = None
        if loc is not None and loc.is_member:
            return member(kind="local", note=f"Member-at-L={L} (local)", **meta)
    rows = _level_rows(ns, L)
    if rows > params.budget_rows:
        return unknown(kind="budget", note=f"level {L} needs {rows} rows; budget {params.budget_rows}",
                       rows=rows, **meta)
    state = state_vector(p, ns)
    cone = dns_cone(ns, params.tol)
    tup = qc_tuple(ns)
    rng = np.random.default_rng(seed)
    space = ns.space
    probes = [space.basis_element(i) for i in range(space.dim)] + ns.generators()
    probes += [SpaceElement(space, rng.standard_normal(space.dim)) for _ in range(n_random)]
    candidate = adversarial_probe(ns, state, L, params)
    if candidate is not None:
        probes.append(candidate)
    undecided = 0
    checked = 0
    for x in probes:
        value = float(state @ x.coeffs)
        if value >= -tol:
            continue
        checked += 1
        v = level_membership(cone, tup, x, L, params)
        if v.is_member:
            return non_member(kind="level_member", element=x.coeffs, value=value,
                              note=f"negative on a level-{L} member", **meta)
        if v.is_unknown:
            undecided += 1
    if undecided:
        return unknown(note=f"{undecided} probes undecided", **meta)
    return member(kind="probe_battery", probes=len(probes), negative_probes_rejected=checked,
                  note=f"Member-at-L={L}", **meta)
