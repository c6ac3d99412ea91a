import numpy as np
import pytest

from aouqc.conic import (LpProblem, PsdAffineProblem, Status, cone_contains, hvec, hvec_adjoint,
                         hvec_length, lineality_basis, lp_feasible, lp_optimize, psd_affine_feasible,
                         unhvec)
from aouqc.linalg import min_eig, random_hermitian


@pytest.mark.parametrize("cplx", [True, False])
def test_hvec_round_trip_and_length(rng, cplx):
    for s in (1, 2, 4):
        S = random_hermitian(s, rng, real=not cplx)
        h = hvec(S, cplx)
        assert h.size == hvec_length(s, cplx)
        assert np.allclose(unhvec(h, s, cplx), S)


@pytest.mark.parametrize("cplx", [True, False])
def test_hvec_adjoint_is_the_adjoint(rng, cplx):
    s = 3
    S = random_hermitian(s, rng, real=not cplx)
    w = rng.standard_normal(hvec_length(s, cplx))
    Z = hvec_adjoint(w, s, cplx)
    assert np.isclose(w @ hvec(S, cplx), np.real(np.trace(Z @ S)))


def test_lp_member_and_certificate():
    A = np.array([[1.0, 1.0], [1.0, -1.0]])
    v = lp_feasible(LpProblem(A, [2.0, 0.0], [True, True]))
    assert v.status is Status.MEMBER and np.allclose(A @ v.certificate.data["x"], [2, 0])
    bad = lp_feasible(LpProblem(A, [-1.0, 0.0], [True, True]))
    assert bad.is_non_member
    y = bad.certificate.data["y"]
    # independent check of the Farkas conditions
    assert np.all(A.T @ y >= -1e-9) and np.array([-1.0, 0.0]) @ y < 0


def test_lp_free_variables():
    v = lp_feasible(LpProblem(np.array([[1.0]]), [-3.0], [False]))
    assert v.is_member and np.isclose(v.certificate.data["x"][0], -3.0)


def test_lp_optimize_maximize():
    val, x = lp_optimize([1.0, 2.0], A_ub=np.array([[1.0, 1.0]]), b_ub=[1.0], maximize=True)
    assert np.isclose(val, 2.0) and np.allclose(x, [0, 1])


def _diag_problem(b, cplx=False):
    """PSD S (2x2) with diagonal b."""
    s = 2
    h = hvec_length(s, cplx)
    A = np.zeros((2, h))
    A[0, 0] = A[1, 1] = 1.0
    return PsdAffineProblem([s], A, b, complex_blocks=cplx)


def test_psd_affine_member_and_nonmember():
    ok = psd_affine_feasible(_diag_problem([1.0, 2.0]))
    assert ok.is_member
    S = ok.certificate.data["blocks"][0]
    assert min_eig(S) >= -1e-9 and np.allclose(np.diag(S), [1, 2], atol=1e-7)
    bad = psd_affine_feasible(_diag_problem([1.0, -1.0]))
    assert bad.is_non_member
    d = bad.certificate.data
    assert d["value"] < 0 and min_eig(d["Z"][0]) >= -1e-7


def test_psd_affine_scalar_variables_and_bounds():
    # S_11 + t = -1 has no solution with t >= 0; the certificate ignores the upper bound
    A = np.zeros((1, 3))
    A[0, 0] = 1.0
    prob = PsdAffineProblem([2], A, [-1.0], C=np.array([[1.0]]), lower=[0.0], upper=[5.0],
                            complex_blocks=False)
    assert psd_affine_feasible(prob).is_non_member
    prob = PsdAffineProblem([2], A, [3.0], C=np.array([[1.0]]), lower=[0.0], upper=[5.0],
                            objective=[1.0], complex_blocks=False)
    v = psd_affine_feasible(prob)
    assert v.is_member and abs(v.certificate.data["z"][0]) < 1e-6


def test_psd_affine_shape_errors():
    with pytest.raises(ValueError):
        PsdAffineProblem([2], np.zeros((1, 2)), [0.0], complex_blocks=False)


def test_cone_contains_and_lineality():
    gens = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert cone_contains(gens, [1.0, 2.0]).is_member
    assert cone_contains(gens, [-1.0, 2.0]).is_non_member
    assert lineality_basis(gens) == []
    line = lineality_basis(np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]]))
    assert len(line) == 1 and np.allclose(np.abs(line[0]), [1.0, 0.0])
