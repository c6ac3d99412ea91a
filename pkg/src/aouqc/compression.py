"""Compression cones for tuples of positive contractions.

For a tuple ``p_1, ..., p_N`` in an operator system with ambient ordering
``C``, the operators

    P_k = I_{2^(k-1)} ⊗ (p_k ⊕ p_k^⊥) ⊗ J_{2^(N-k)}
    Q_k = I_{2^(k-1)} ⊗ (p_k^⊥ ⊕ p_k) ⊗ J_{2^(N-k)}

(hat versions put ``J`` in place of the leading identity) define the
compression cone: ``x`` at level ``n 2^N`` belongs to it when for every
``eps > 0`` some ``t > 0`` puts ``x + sum eps_k I_n ⊗ P_k + sum t_k I_n ⊗ Q_k``
in ``C``.  Each scheduled ``eps`` becomes one semidefinite feasibility problem
over ``t``.

Level cones repeat the tuple ``L`` times and pull back along
``x -> x ⊗ J_{2^(NL)}``.  Their union, closed up by ``x + eps e``, is the
inductive limit, whose ground level decides whether the ``p_i`` behave like
projections.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .conic import Verdict, member, non_member, unknown
from .linalg import DEFAULT_TOL, Tolerance, kron, ones
from .ordered import (DEFAULT_SCHEDULE, Cone, ConeKind, ConicCone, MatrixElement, MaxCone,
                      SpaceElement, StarSpace, _check_schedule, as_matrix)


class BudgetExceeded(RuntimeError):
    """Raised instead of building an operator larger than the row budget."""


@dataclass(frozen=True)
class ScheduleParams:
    eps: tuple = DEFAULT_SCHEDULE
    t_max: float = 1e6
    budget_rows: int = 4096
    tol: Tolerance = DEFAULT_TOL

    def __post_init__(self):
        object.__setattr__(self, "eps", tuple(float(e) for e in self.eps))
        _check_schedule(self.eps)
        if self.t_max <= 0:
            raise ValueError("t_max must be positive")
        if self.budget_rows < 1:
            raise ValueError("budget_rows must be positive")


DEFAULT_PARAMS = ScheduleParams()


class ContractionTuple:
    """Positive contractions ``p_1..p_N``: each ``p_i`` and ``e - p_i`` must be
    Members of ``cone`` (checked at level 1)."""

    def __init__(self, space: StarSpace, ps, cone: Cone | None = None):
        self.space = space
        self.ps = [p if isinstance(p, SpaceElement) else SpaceElement(space, p) for p in ps]
        if not self.ps:
            raise ValueError("need at least one contraction")
        for i, p in enumerate(self.ps):
            if p.space is not space:
                raise ValueError("contraction lives in a different space")
            if not p.is_hermitian():
                raise ValueError(f"p_{i + 1} is not hermitian")
        if cone is not None:
            for i, p in enumerate(self.ps):
                for name, v in (("p", p), ("e - p", p.perp())):
                    verdict = cone.membership(v)
                    if not verdict.is_member:
                        raise ValueError(f"{name}_{i + 1} is not in the cone "
                                         f"({verdict.status}); not a positive contraction")

    @property
    def N(self) -> int:
        return len(self.ps)

    @property
    def perps(self):
        return [p.perp() for p in self.ps]

    def repeated(self, L: int) -> "ContractionTuple":
        return ContractionTuple(self.space, self.ps * L)

    def reordered(self, order) -> "ContractionTuple":
        return ContractionTuple(self.space, [self.ps[i] for i in order])


# ------------------------------------------------------------------ operators


def _pair_block(first: SpaceElement, second: SpaceElement) -> np.ndarray:
    """Coefficient stack of ``first ⊕ second`` (level 2)."""
    d = first.space.dim
    out = np.zeros((d, 2, 2), dtype=np.result_type(first.coeffs, second.coeffs))
    out[:, 0, 0] = first.coeffs
    out[:, 1, 1] = second.coeffs
    return out


def _structured(tup: ContractionTuple, i: int, N: int | None, hat: bool, swap: bool) -> MatrixElement:
    N = tup.N if N is None else N
    if not 1 <= i <= N or N > tup.N:
        raise IndexError(f"index {i} out of range for N={N}")
    p = tup.ps[i - 1]
    pp = p.perp()
    core = _pair_block(pp, p) if swap else _pair_block(p, pp)
    left = ones(2 ** (i - 1)) if hat else np.eye(2 ** (i - 1))
    right = ones(2 ** (N - i))
    return MatrixElement(tup.space, np.stack([kron(left, c, right) for c in core]))


def build_P(tup: ContractionTuple, i: int, N: int | None = None, hat: bool = False) -> MatrixElement:
    """``P_i^N`` (or its hat version) at level ``2^N``."""
    return _structured(tup, i, N, hat, swap=False)


def build_Q(tup: ContractionTuple, i: int, N: int | None = None, hat: bool = False) -> MatrixElement:
    """``Q_i^N``: like ``P_i^N`` with ``p`` and ``e - p`` exchanged."""
    return _structured(tup, i, N, hat, swap=True)


def build_P_hat(tup, i, N=None):
    return build_P(tup, i, N, hat=True)


def build_Q_hat(tup, i, N=None):
    return build_Q(tup, i, N, hat=True)


def _level_op(tup, i, j, N, L, swap):
    N = tup.N if N is None else N
    if not 1 <= j <= L:
        raise IndexError(f"copy index {j} out of range for L={L}")
    inner = _structured(tup, i, N, False, swap)
    return inner.kron_left(np.eye(2 ** (N * (j - 1)))).kron_right(ones(2 ** (N * (L - j))))


def build_P_level(tup: ContractionTuple, i: int, j: int, N: int | None = None, L: int = 1) -> MatrixElement:
    """``I_{2^(N(j-1))} ⊗ P_i^N ⊗ J_{2^(N(L-j))}`` at level ``2^(NL)``."""
    return _level_op(tup, i, j, N, L, swap=False)


def build_Q_level(tup: ContractionTuple, i: int, j: int, N: int | None = None, L: int = 1) -> MatrixElement:
    return _level_op(tup, i, j, N, L, swap=True)


# ----------------------------------------------------------------- membership


def _as_conic(cone: Cone) -> ConicCone:
    if not isinstance(cone, ConicCone):
        raise TypeError("the ambient cone must provide a conic lift (MaxCone or DiagonalCone)")
    return cone


def compression_membership(cone: Cone, tup: ContractionTuple, x, params: ScheduleParams = DEFAULT_PARAMS,
                           hat: bool = False, eps_weights=None) -> Verdict:
    """Decide ``x`` (level ``n 2^N``) in the compression cone of ``tup``.

    For every scheduled ``eps`` the vector ``eps_k = eps * eps_weights[k]`` is
    used; ``t`` ranges over ``[0, t_max]`` with ``sum t`` minimized.  The
    reported witness is ``t_k = max(2 t_min_k, eps_k)`` (capped at ``t_max``),
    re-checked by the ambient oracle.  Because every ``Q_k`` lies in the
    ambient cone, raising ``t`` never loses membership, so ``t = 0`` in the
    search costs nothing.
    """
    cone = _as_conic(cone)
    x = as_matrix(x)
    N = tup.N
    block = 2 ** N
    if x.level % block:
        raise ValueError(f"level {x.level} is not a multiple of 2^N = {block}")
    if x.level > params.budget_rows:
        raise BudgetExceeded(f"level {x.level} exceeds the budget of {params.budget_rows} rows")
    n = x.level // block
    w = np.ones(N) if eps_weights is None else np.asarray(eps_weights, dtype=float)
    if w.shape != (N,) or np.any(w <= 0):
        raise ValueError("eps_weights must be N positive numbers")
    In = np.eye(n)
    Ps = [build_P(tup, k, N, hat).kron_left(In) for k in range(1, N + 1)]
    Qs = [build_Q(tup, k, N, hat).kron_left(In) for k in range(1, N + 1)]

    rounds = []
    pending = None
    for eps in params.eps:
        eps_vec = eps * w
        base = x
        for e_k, P in zip(eps_vec, Ps):
            base = base + e_k * P
        v = cone.feasible_affine(base, Qs, lower=np.zeros(N), upper=np.full(N, params.t_max),
                                 objective=np.ones(N))
        if v.is_non_member:
            cert = v.certificate.data
            return non_member(kind="separating_functional", note=f"infeasible at eps={eps:g}",
                              eps=eps, eps_vector=eps_vec, functional=cert["functional"],
                              value=cert["value"], hat=hat, rounds=rounds)
        if v.is_unknown:
            pending = pending or f"undecided at eps={eps:g}: {v.note}"
            rounds.append(dict(eps=eps, status="Unknown"))
            continue
        t_min = np.asarray(v.certificate.data["z"], dtype=float)
        decided = None
        for t in (np.minimum(np.maximum(2 * t_min, eps_vec), params.t_max), t_min):
            point = base
            for t_k, Q in zip(t, Qs):
                point = point + t_k * Q
            if cone.membership(point).is_member:
                decided = t
                break
        if decided is None:
            pending = pending or f"witness failed re-check at eps={eps:g}"
            rounds.append(dict(eps=eps, status="Unknown"))
            continue
        saturated = bool(np.any(t_min >= 0.999 * params.t_max))
        rounds.append(dict(eps=eps, status="Member", t=decided, t_min=t_min,
                           eps_vector=eps_vec, saturated=saturated))
    if pending:
        return unknown(note=pending, rounds=rounds, hat=hat)
    return member(kind="t_values", note="member within schedule", rounds=rounds, hat=hat)


def tensor_ones(x, power: int) -> MatrixElement:
    """``x ⊗ J_{2^power}``."""
    return as_matrix(x).kron_right(ones(2 ** power))


def level_membership(cone: Cone, tup: ContractionTuple, x, L: int,
                     params: ScheduleParams = DEFAULT_PARAMS) -> Verdict:
    """Is ``x ⊗ J_{2^(NL)}`` in the compression cone of the tuple repeated
    ``L`` times?"""
    if L < 1:
        raise ValueError("L must be at least 1")
    x = as_matrix(x)
    rows = x.level * 2 ** (tup.N * L)
    if rows > params.budget_rows:
        raise BudgetExceeded(f"level {L} needs {rows} rows, budget is {params.budget_rows}")
    v = compression_membership(cone, tup.repeated(L), tensor_ones(x, tup.N * L), params)
    v.certificate.data["L"] = L
    return v


def inductive_membership(cone: Cone, tup: ContractionTuple, x, L_max: int = 1,
                         params: ScheduleParams = DEFAULT_PARAMS) -> Verdict:
    """Scan ``L = 1..L_max`` for ``x + eps (I ⊗ e)`` at every scheduled eps.

    Member when each eps is accepted at some ``L``.  NonMember when some eps
    is rejected, with a certificate, at every ``L <= L_max``; this is a
    rejection relative to ``L_max`` since the level cones grow with ``L``.
    Budget exhaustion before a decision gives Unknown.
    """
    x = as_matrix(x)
    unit = cone.space.unit_matrix(x.level)
    found = []
    start = 1
    pending = None
    for eps in params.eps:
        shifted = x + eps * unit
        certs = []
        accepted = None
        budget_hit = False
        for L in range(start, L_max + 1):
            try:
                v = level_membership(cone, tup, shifted, L, params)
            except BudgetExceeded as exc:
                budget_hit = True
                pending = pending or f"budget: {exc}"
                break
            if v.is_member:
                accepted = L
                break
            if v.is_non_member:
                certs.append(dict(L=L, eps_inner=v.certificate.data["eps"],
                                  functional=v.certificate.data["functional"],
                                  value=v.certificate.data["value"]))
            else:
                pending = pending or f"undecided at eps={eps:g}, L={L}"
        if accepted is not None:
            found.append(dict(eps=eps, L=accepted))
            start = accepted  # smaller eps cannot be accepted below this L
            continue
        if not budget_hit and len(certs) == L_max - start + 1:
            return non_member(kind="level_functionals", L_max=L_max, eps=eps, certificates=certs,
                              note=f"rejected for every L <= {L_max} at eps={eps:g}")
        pending = pending or f"no decision at eps={eps:g}"
        if budget_hit:
            return unknown(kind="budget", note=pending, accepted=found)
    if pending:
        return unknown(note=pending, accepted=found)
    return member(kind="levels", accepted=found, L=max(f["L"] for f in found),
                  note="member within schedule")


# ------------------------------------------------------------------ cone handles


class CompressionCone(Cone):
    kind = ConeKind.COMPRESSION

    def __init__(self, ambient: ConicCone, tup: ContractionTuple, params=DEFAULT_PARAMS, hat=False):
        super().__init__(ambient.space, ambient.tol)
        self.ambient, self.tuple, self.params, self.hat = ambient, tup, params, hat

    def membership(self, x) -> Verdict:
        return compression_membership(self.ambient, self.tuple, x, self.params, self.hat)


class LevelCone(Cone):
    kind = ConeKind.LEVEL

    def __init__(self, ambient: ConicCone, tup: ContractionTuple, L: int, params=DEFAULT_PARAMS):
        super().__init__(ambient.space, ambient.tol)
        self.ambient, self.tuple, self.L, self.params = ambient, tup, L, params

    def membership(self, x) -> Verdict:
        try:
            return level_membership(self.ambient, self.tuple, x, self.L, self.params)
        except BudgetExceeded as exc:
            return unknown(kind="budget", note=str(exc))


class InductiveLimitCone(Cone):
    kind = ConeKind.INDUCTIVE_LIMIT

    def __init__(self, ambient: ConicCone, tup: ContractionTuple, L_max: int = 1, params=DEFAULT_PARAMS):
        super().__init__(ambient.space, ambient.tol)
        self.ambient, self.tuple, self.L_max, self.params = ambient, tup, L_max, params

    def membership(self, x) -> Verdict:
        return inductive_membership(self.ambient, self.tuple, x, self.L_max, self.params)


# ---------------------------------------------------------------- hat helpers


def hat_weights(N: int) -> np.ndarray:
    """``eps`` weights ``1 / 2^(k-1)`` so that hat witnesses transport to the
    plain cone at the unweighted schedule."""
    return 1.0 / 2.0 ** np.arange(N)


def hat_witness_to_plain(t_hat) -> np.ndarray:
    """Map hat ``t_k`` to plain ``2^(k-1) t_k`` (uses ``J_m <= m I_m``)."""
    t_hat = np.asarray(t_hat, dtype=float)
    return t_hat * 2.0 ** np.arange(t_hat.size)


def plain_point(tup: ContractionTuple, x, eps_vec, t, hat: bool = False) -> MatrixElement:
    """``x + sum eps_k I ⊗ P_k + sum t_k I ⊗ Q_k`` (hat operators if ``hat``)."""
    x = as_matrix(x)
    N = tup.N
    In = np.eye(x.level // 2 ** N)
    out = x
    for k in range(1, N + 1):
        out = out + eps_vec[k - 1] * build_P(tup, k, N, hat).kron_left(In)
        out = out + t[k - 1] * build_Q(tup, k, N, hat).kron_left(In)
    return out


def transported_hat_check(cone: ConicCone, tup: ContractionTuple, x, hat_verdict: Verdict) -> bool:
    """Re-check every round of a hat Member (run with :func:`hat_weights`) as a
    plain Member with ``eps`` unweighted and ``t`` mapped by
    :func:`hat_witness_to_plain`."""
    if not hat_verdict.is_member:
        raise ValueError("needs a Member verdict")
    N = tup.N
    for rnd in hat_verdict.certificate.data["rounds"]:
        eps_plain = rnd["eps_vector"] * 2.0 ** np.arange(N)
        t_plain = hat_witness_to_plain(rnd["t"])
        if not cone.membership(plain_point(tup, x, eps_plain, t_plain)).is_member:
            return False
    return True


def permute_hat_operator(op: MatrixElement, N: int, perm) -> MatrixElement:
    """Reorder the ``N`` two-dimensional tensor factors of a level ``2^N``
    operator; factor ``perm[i]`` moves to position ``i``.  Applied to the hat
    operator of ``p[perm[i]]`` this gives the hat operator at index ``i`` of
    the reordered tuple."""
    from .linalg import permute_factors
    dims = (2,) * N
    return MatrixElement(op.space, np.stack([permute_factors(X, dims, perm) for X in op.coeffs]))


# --------------------------------------------------------------- projection test


@dataclass
class ProbeResult:
    label: str
    probe: SpaceElement
    in_cone: Verdict
    lifted: Verdict
    outcome: str  # "agree", "disagree", "unknown"


@dataclass
class ProjectionReport:
    verdict: str  # "Pass", "Fail", "Unknown"
    probes: list = field(default_factory=list)
    witness: ProbeResult | None = None

    @property
    def decided(self) -> bool:
        return self.verdict in ("Pass", "Fail")


def default_probes(space: StarSpace, tup: ContractionTuple, n_random: int = 50, seed: int = 0):
    rng = np.random.default_rng(seed)
    probes = [(f"basis:{lab}", space.basis_element(i)) for i, lab in enumerate(space.labels)]
    for i, p in enumerate(tup.ps):
        probes.append((f"p{i + 1}", p))
        probes.append((f"-p{i + 1}", -p))
    for r in range(n_random):
        probes.append((f"random{r}", SpaceElement(space, rng.standard_normal(space.dim))))
    return probes


def projection_test(aou_cone: Cone, tup: ContractionTuple, probes=None, L_max: int = 1,
                    params: ScheduleParams = DEFAULT_PARAMS, lifted_cone: ConicCone | None = None,
                    n_random: int = 50, seed: int = 0,
                    stop_at_first_failure: bool = True) -> ProjectionReport:
    """Compare the ground cone with the pullback of the compression hierarchy.

    A probe that the ground cone rejects while the hierarchy accepts shows the
    contractions are not projections.  To keep such a witness independent of
    the finite schedule, the rejection must persist after adding
    ``2 * eps_min * e``; otherwise the probe is counted as undecided.
    """
    space = aou_cone.space
    if lifted_cone is None:
        lifted_cone = MaxCone(space, aou_cone.ground_generators(), aou_cone.tol)
    if probes is None:
        probes = default_probes(space, tup, n_random, seed)
    else:
        probes = [(p[0], p[1]) if isinstance(p, tuple) else (f"probe{i}", p)
                  for i, p in enumerate(probes)]
    margin = 2.0 * params.eps[-1]
    results = []
    any_unknown = False
    for label, v in probes:
        if not v.is_hermitian():
            raise ValueError(f"probe {label} is not hermitian")
        a = aou_cone.membership(v)
        b = inductive_membership(lifted_cone, tup, v, L_max, params)
        if a.is_unknown or b.is_unknown:
            outcome = "unknown"
        elif a.is_member == b.is_member:
            outcome = "agree"
        elif b.is_member and a.is_non_member:
            robust = aou_cone.membership(v + margin * space.unit).is_non_member
            outcome = "disagree" if robust else "unknown"
        else:
            # a Member but b NonMember cannot happen for a positive lift
            outcome = "unknown"
        res = ProbeResult(label, v, a, b, outcome)
        results.append(res)
        if outcome == "disagree":
            if stop_at_first_failure:
                return ProjectionReport("Fail", results, res)
        elif outcome == "unknown":
            any_unknown = True
    fails = [r for r in results if r.outcome == "disagree"]
    if fails:
        return ProjectionReport("Fail", results, fails[0])
    return ProjectionReport("Unknown" if any_unknown else "Pass", results)
