"""Feasibility oracles with certificates.

Two kernels are exposed:

* :func:`lp_feasible` for ``A x = b`` with some coordinates sign-constrained,
  solved with HiGHS through :func:`scipy.optimize.linprog`;
* :func:`psd_affine_feasible` for "find PSD blocks ``S_j`` and bounded
  scalars ``z`` with ``A hvec(S) + C z = b``", solved with an interior point
  method through cvxpy.

A feasible answer is always re-checked by substitution before it is reported
as ``Member``.  An infeasible answer is reported as ``NonMember`` only when a
Farkas-type certificate has been found and re-checked; anything else is
``Unknown``.

Hermitian blocks are parametrised by real coordinates ``hvec``: the diagonal,
then the real parts of the strict upper triangle (row major), then the
imaginary parts of the strict upper triangle.  Real symmetric blocks drop the
imaginary part.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.linalg import orth
from scipy.optimize import linprog

from .linalg import DEFAULT_TOL, Tolerance, min_eig, psd_projection, spectral_norm

try:  # cvxpy is only needed for the semidefinite kernel
    import cvxpy as cp
except ImportError:  # pragma: no cover
    cp = None


class Status(enum.Enum):
    MEMBER = "Member"
    NON_MEMBER = "NonMember"
    UNKNOWN = "Unknown"

    def __str__(self):
        return self.value


@dataclass
class Certificate:
    """Evidence attached to a verdict.

    ``kind`` names the evidence ("witness", "farkas", "state", "budget", ...)
    and ``data`` holds arrays or scalars.  Certificates are plain data so that
    they serialize deterministically.
    """

    kind: str
    data: dict = field(default_factory=dict)


@dataclass
class Verdict:
    status: Status
    certificate: Certificate = field(default_factory=lambda: Certificate("none"))
    note: str = ""

    @property
    def is_member(self) -> bool:
        return self.status is Status.MEMBER

    @property
    def is_non_member(self) -> bool:
        return self.status is Status.NON_MEMBER

    @property
    def is_unknown(self) -> bool:
        return self.status is Status.UNKNOWN


def member(kind="witness", note="", **data) -> Verdict:
    return Verdict(Status.MEMBER, Certificate(kind, data), note)


def non_member(kind="farkas", note="", **data) -> Verdict:
    return Verdict(Status.NON_MEMBER, Certificate(kind, data), note)


def unknown(kind="none", note="", **data) -> Verdict:
    return Verdict(Status.UNKNOWN, Certificate(kind, data), note)


# ---------------------------------------------------------------- linear programs


@dataclass
class LpProblem:
    """``A_eq x = b_eq`` with ``x[i] >= 0`` wherever ``nonneg[i]``."""

    A_eq: np.ndarray
    b_eq: np.ndarray
    nonneg: np.ndarray
    objective: np.ndarray | None = None

    def __post_init__(self):
        self.A_eq = np.atleast_2d(np.asarray(self.A_eq, dtype=float))
        self.b_eq = np.asarray(self.b_eq, dtype=float).reshape(-1)
        self.nonneg = np.asarray(self.nonneg, dtype=bool).reshape(-1)
        m, nvar = self.A_eq.shape
        if self.b_eq.shape != (m,):
            raise ValueError(f"b_eq has length {self.b_eq.size}, expected {m}")
        if self.nonneg.shape != (nvar,):
            raise ValueError(f"nonneg mask has length {self.nonneg.size}, expected {nvar}")
        if self.objective is not None:
            self.objective = np.asarray(self.objective, dtype=float).reshape(-1)
            if self.objective.shape != (nvar,):
                raise ValueError("objective length does not match the variable count")


def lp_feasible(prob: LpProblem, tol: Tolerance = DEFAULT_TOL,
                max_iter: int = 100_000) -> Verdict:
    """Decide feasibility of an :class:`LpProblem`.

    Member carries ``x`` (and ``value`` if an objective was given).
    NonMember carries ``y`` with ``A^T y >= 0`` on the sign-constrained
    columns, ``A^T y = 0`` on the free ones and ``b . y < 0``.
    """
    A, b = prob.A_eq, prob.b_eq
    m, nvar = A.shape
    bounds = [(0, None) if nn else (None, None) for nn in prob.nonneg]
    c = prob.objective if prob.objective is not None else np.zeros(nvar)
    if nvar == 0:
        if np.max(np.abs(b), initial=0.0) <= tol.affine_slack():
            return member(x=np.zeros(0))
        y = -np.sign(b)
        return non_member(y=y, value=float(b @ y))
    res = linprog(c, A_eq=A, b_eq=b, bounds=bounds, method="highs",
                  options={"maxiter": max_iter})
    if res.status == 1:
        return unknown("budget", note="LP iteration limit reached")
    if res.status in (0, 3) and res.x is not None:
        x = np.array(res.x)
        x[prob.nonneg] = np.maximum(x[prob.nonneg], 0.0)
        resid = float(np.max(np.abs(A @ x - b), initial=0.0))
        if resid <= tol.affine_slack(float(np.max(np.abs(b), initial=0.0))):
            data = {"x": x, "residual": resid}
            if prob.objective is not None:
                data["value"] = float(c @ x)
                if res.status == 3:
                    data["unbounded"] = True
            return member(**data)
    if res.status == 3:
        return member(note="objective unbounded below", unbounded=True)
    return _lp_farkas(prob, tol)


def _lp_farkas(prob: LpProblem, tol: Tolerance) -> Verdict:
    A, b = prob.A_eq, prob.b_eq
    m = A.shape[0]
    nn = prob.nonneg
    # minimize b.y  subject to  A^T y >= 0 (nonneg cols), A^T y = 0 (free cols), |y| <= 1
    A_ub = -A[:, nn].T if nn.any() else None
    b_ub = np.zeros(int(nn.sum())) if nn.any() else None
    A_eq = A[:, ~nn].T if (~nn).any() else None
    b_eq = np.zeros(int((~nn).sum())) if (~nn).any() else None
    res = linprog(b, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                  bounds=[(-1.0, 1.0)] * m, method="highs")
    if res.status != 0 or res.x is None:
        return unknown(note="no Farkas certificate found")
    y = np.array(res.x)
    g = A.T @ y
    slack = tol.affine_slack()
    ok = (np.all(g[nn] >= -slack) and np.all(np.abs(g[~nn]) <= slack))
    val = float(b @ y)
    if ok and val < -tol.affine_slack(float(np.max(np.abs(b), initial=0.0))):
        return non_member(y=y, value=val)
    return unknown(note="infeasible by solver status but certificate too weak",
                   value=val)


def lp_optimize(c, A_eq=None, b_eq=None, A_ub=None, b_ub=None, bounds=(0, None),
                maximize=False):
    """Thin wrapper returning ``(value, x)``; raises if the LP is not solved."""
    c = np.asarray(c, dtype=float)
    sign = -1.0 if maximize else 1.0
    res = linprog(sign * c, A_eq=A_eq, b_eq=b_eq, A_ub=A_ub, b_ub=b_ub,
                  bounds=bounds, method="highs")
    if res.status != 0:
        raise RuntimeError(f"LP not solved: {res.message}")
    return sign * float(res.fun), np.array(res.x)


# ----------------------------------------------------------- hermitian coordinates


def hvec_length(s: int, complex_blocks: bool = True) -> int:
    return s * s if complex_blocks else s * (s + 1) // 2


def hvec(S: np.ndarray, complex_blocks: bool = True) -> np.ndarray:
    S = np.asarray(S)
    iu = np.triu_indices(S.shape[0], 1)
    parts = [np.real(np.diag(S)), np.real(S[iu])]
    if complex_blocks:
        parts.append(np.imag(S[iu]))
    return np.concatenate(parts)


def unhvec(h: np.ndarray, s: int, complex_blocks: bool = True) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    iu = np.triu_indices(s, 1)
    u = len(iu[0])
    S = np.zeros((s, s), dtype=complex if complex_blocks else float)
    S[np.diag_indices(s)] = h[:s]
    upper = h[s:s + u] + (1j * h[s + u:s + 2 * u] if complex_blocks else 0.0)
    S[iu] = upper
    S[(iu[1], iu[0])] = np.conj(upper)
    return S


def hvec_adjoint(w: np.ndarray, s: int, complex_blocks: bool = True) -> np.ndarray:
    """The hermitian ``Z`` with ``w . hvec(S) = Re tr(Z S)`` for all hermitian S."""
    w = np.array(w, dtype=float)
    w[s:] *= 0.5
    return unhvec(w, s, complex_blocks)


@lru_cache(maxsize=256)
def _embed_to_hvec(s: int, complex_blocks: bool) -> sp.csr_matrix:
    """Sparse map from column-major vec of a real PSD variable to hvec.

    In the complex case the variable is a real symmetric ``2s x 2s`` matrix
    ``M`` and the hermitian block is ``(M11 + M22)/2 + i (M21 - M12)/2``,
    which is PSD whenever ``M`` is and reaches every PSD hermitian block.
    """
    size = 2 * s if complex_blocks else s
    rows, cols, vals = [], [], []

    def add(r, i, j, v):
        rows.append(r)
        cols.append(i + j * size)
        vals.append(v)

    iu = list(zip(*np.triu_indices(s, 1)))
    u = len(iu)
    if complex_blocks:
        for a in range(s):
            add(a, a, a, 0.5)
            add(a, s + a, s + a, 0.5)
        for idx, (a, b) in enumerate(iu):
            add(s + idx, a, b, 0.5)
            add(s + idx, s + a, s + b, 0.5)
            add(s + u + idx, s + a, b, 0.5)
            add(s + u + idx, a, s + b, -0.5)
    else:
        for a in range(s):
            add(a, a, a, 1.0)
        for idx, (a, b) in enumerate(iu):
            add(s + idx, a, b, 1.0)
    return sp.csr_matrix((vals, (rows, cols)), shape=(hvec_length(s, complex_blocks), size * size))


@lru_cache(maxsize=256)
def _offdiag_doubling(s: int, complex_blocks: bool) -> sp.dia_matrix:
    d = np.full(hvec_length(s, complex_blocks), 2.0)
    d[:s] = 1.0
    return sp.diags(d)


# ------------------------------------------------------------ semidefinite kernel


@dataclass
class PsdAffineProblem:
    """Find PSD blocks ``S_j`` and scalars ``lower <= z <= upper`` with
    ``A @ concat(hvec(S_j)) + C @ z = b``.

    ``objective`` (over z) is minimized when given.  Upper bounds on z are
    respected by the primal search but not used by the infeasibility
    certificate, so a ``NonMember`` verdict holds for every ``z >= lower``.
    """

    block_sizes: list
    A: object
    b: np.ndarray
    C: object = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    objective: np.ndarray | None = None
    complex_blocks: bool = True
    tol: Tolerance = DEFAULT_TOL

    def __post_init__(self):
        self.block_sizes = [int(s) for s in self.block_sizes]
        self.b = np.asarray(self.b, dtype=float).reshape(-1)
        m = self.b.size
        nh = sum(hvec_length(s, self.complex_blocks) for s in self.block_sizes)
        self.A = sp.csr_matrix(self.A) if self.A is not None else sp.csr_matrix((m, nh))
        if self.A.shape != (m, nh):
            raise ValueError(f"A has shape {self.A.shape}, expected {(m, nh)}")
        if self.C is None:
            self.C = sp.csr_matrix((m, 0))
        else:
            self.C = sp.csr_matrix(self.C)
        if self.C.shape[0] != m:
            raise ValueError("C must have as many rows as b")
        nz = self.C.shape[1]
        self.lower = (np.zeros(nz) if self.lower is None
                      else np.asarray(self.lower, dtype=float).reshape(-1))
        self.upper = (np.full(nz, np.inf) if self.upper is None
                      else np.asarray(self.upper, dtype=float).reshape(-1))
        if self.lower.shape != (nz,) or self.upper.shape != (nz,):
            raise ValueError("bounds must match the number of scalar variables")
        if self.objective is not None:
            self.objective = np.asarray(self.objective, dtype=float).reshape(-1)
            if self.objective.shape != (nz,):
                raise ValueError("objective must match the number of scalar variables")

    @property
    def n_scalars(self) -> int:
        return self.C.shape[1]

    def block_slices(self):
        out, start = [], 0
        for s in self.block_sizes:
            ln = hvec_length(s, self.complex_blocks)
            out.append(slice(start, start + ln))
            start += ln
        return out

    def residual(self, blocks, z) -> float:
        h = (np.concatenate([hvec(S, self.complex_blocks) for S in blocks])
             if blocks else np.zeros(0))
        r = self.A @ h + self.C @ np.asarray(z, dtype=float) - self.b
        return float(np.max(np.abs(r), initial=0.0))


_SOLVER_OPTS = dict(solver="CLARABEL", tol_feas=1e-10, tol_gap_abs=1e-10, tol_gap_rel=1e-10,
                    tol_ktratio=1e-8)
_OK = ("optimal", "optimal_inaccurate")


def _solve(problem) -> str:
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            problem.solve(**_SOLVER_OPTS)
    except (cp.error.SolverError, ValueError, ArithmeticError):
        return "solver_error"
    return problem.status


def psd_affine_feasible(prob: PsdAffineProblem) -> Verdict:
    """Decide feasibility of a :class:`PsdAffineProblem` with certificates.

    Member data: ``blocks`` (list of PSD matrices), ``z``, ``residual``.
    NonMember data: ``y`` (dual multipliers of the equations), ``Z`` (the
    induced PSD blocks) and ``value`` (strictly negative pairing).
    """
    tol = prob.tol
    m = prob.b.size
    nz = prob.n_scalars
    bscale = float(np.max(np.abs(prob.b), initial=0.0))

    if not prob.block_sizes and nz == 0:
        if bscale <= tol.affine_slack():
            return member(blocks=[], z=np.zeros(0), residual=bscale)
        y = -np.sign(prob.b) / 1.0
        return non_member(y=y, Z=[], value=float(prob.b @ y))

    Ms = [cp.Variable((2 * s, 2 * s) if prob.complex_blocks else (s, s), PSD=True)
          for s in prob.block_sizes]
    pieces = [_embed_to_hvec(s, prob.complex_blocks) @ cp.vec(M, order="F")
              for s, M in zip(prob.block_sizes, Ms)]
    z = cp.Variable(nz) if nz else None
    lhs = 0
    if pieces:
        lhs = prob.A @ (cp.hstack(pieces) if len(pieces) > 1 else pieces[0])
    if nz:
        lhs = lhs + prob.C @ z
    cons = [lhs == prob.b]
    if nz:
        fin_lo = np.isfinite(prob.lower)
        fin_hi = np.isfinite(prob.upper)
        if fin_lo.any():
            cons.append(z[np.flatnonzero(fin_lo)] >= prob.lower[fin_lo])
        if fin_hi.any():
            cons.append(z[np.flatnonzero(fin_hi)] <= prob.upper[fin_hi])
    obj = (cp.Minimize(prob.objective @ z) if (prob.objective is not None and nz)
           else cp.Minimize(0))
    status = _solve(cp.Problem(obj, cons))

    if status in _OK:
        blocks = []
        for s, M in zip(prob.block_sizes, Ms):
            h = _embed_to_hvec(s, prob.complex_blocks) @ np.ravel(M.value, order="F")
            blocks.append(psd_projection(unhvec(h, s, prob.complex_blocks)))
        zv = np.clip(z.value, prob.lower, prob.upper) if nz else np.zeros(0)
        resid = prob.residual(blocks, zv)
        cscale = float(np.max(np.abs(prob.C @ zv), initial=0.0)) if nz else 0.0
        if resid <= tol.affine_slack(bscale + cscale):
            data = dict(blocks=blocks, z=zv, residual=resid)
            if prob.objective is not None and nz:
                data["value"] = float(prob.objective @ zv)
            return member(**data)
    return _psd_farkas(prob, bscale, solver_status=status)


def _psd_farkas(prob: PsdAffineProblem, bscale: float, solver_status: str) -> Verdict:
    tol = prob.tol
    m = prob.b.size
    nz = prob.n_scalars
    y = cp.Variable(m)
    cons = [y <= 1, y >= -1]
    AT = prob.A.T.tocsr()
    slices = prob.block_slices()
    Ns = []
    for s, sl in zip(prob.block_sizes, slices):
        N = cp.Variable((2 * s, 2 * s) if prob.complex_blocks else (s, s), PSD=True)
        Ns.append(N)
        G = _offdiag_doubling(s, prob.complex_blocks) @ _embed_to_hvec(s, prob.complex_blocks)
        cons.append(AT[sl] @ y == G @ cp.vec(N, order="F"))
    objective = prob.b @ y
    if nz:
        CT = prob.C.T.tocsr()
        fin = np.isfinite(prob.lower)
        if fin.any():
            idx = np.flatnonzero(fin)
            cons.append(CT[idx] @ y >= 0)
            objective = objective - (prob.lower[fin] @ (CT[idx] @ y))
        if (~fin).any():
            cons.append(CT[np.flatnonzero(~fin)] @ y == 0)
    status = _solve(cp.Problem(cp.Minimize(objective), cons))
    if status not in _OK or y.value is None:
        return unknown(note=f"primal status {solver_status}; dual search {status}")

    yv = np.array(y.value)
    w = AT @ yv
    Z = [hvec_adjoint(w[sl], s, prob.complex_blocks) for s, sl in zip(prob.block_sizes, slices)]
    worst = min((min_eig(Zj) for Zj in Z), default=np.inf)
    zscale = max((spectral_norm(Zj) for Zj in Z), default=0.0)
    val = float(prob.b @ yv)
    # the blocks come out of an equality-constrained solve, so they are PSD
    # only up to the affine residual; the value must dominate that error
    ok = worst >= -tol.affine_slack(zscale)
    if nz:
        cty = prob.C.T @ yv
        fin = np.isfinite(prob.lower)
        val -= float(prob.lower[fin] @ cty[fin])
        slack = tol.affine_slack()
        ok = ok and np.all(cty[fin] >= -slack) and np.all(np.abs(cty[~fin]) <= slack)
    violation = max(0.0, -worst) * sum(prob.block_sizes)
    if ok and val < -max(tol.affine_slack(bscale), 100.0 * violation):
        return non_member(y=yv, Z=Z, value=val, min_block_eig=worst)
    return unknown(note=f"primal status {solver_status}; certificate too weak",
                   value=val, min_block_eig=worst, block_scale=zscale,
                   ct_min=float(np.min(prob.C.T @ yv, initial=0.0)) if nz else 0.0)


# ----------------------------------------------------------------- lineality


def cone_contains(generators: np.ndarray, v: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> Verdict:
    """Is ``v`` a nonnegative combination of the rows of ``generators``?"""
    G = np.atleast_2d(np.asarray(generators, dtype=float))
    v = np.asarray(v, dtype=float).reshape(-1)
    return lp_feasible(LpProblem(G.T, v, np.ones(G.shape[0], dtype=bool)), tol)


def lineality_basis(generators, tol: Tolerance = DEFAULT_TOL) -> list:
    """Orthonormal basis of ``cone ∩ -cone`` for a finitely generated cone.

    A generator lies in the lineality space iff its negative lies in the
    cone, and the lineality space is spanned by such generators.
    """
    G = [np.asarray(g, dtype=float).reshape(-1) for g in generators]
    if not G:
        return []
    Gm = np.vstack(G)
    hits = []
    for g in G:
        v = cone_contains(Gm, -g, tol)
        if v.is_unknown:
            raise RuntimeError("lineality LP did not terminate")
        if v.is_member:
            hits.append(g)
    if not hits:
        return []
    basis = orth(np.column_stack(hits))
    return [basis[:, i] for i in range(basis.shape[1])]
