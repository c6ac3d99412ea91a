import numpy as np
import pytest

from aouqc.linalg import min_eig, random_hermitian
from aouqc.ordered import (ArchimedeanClosure, DiagonalCone, DiagonalModel, MatrixElement, MaxCone,
                           SpaceElement, StarSpace, archimedean_membership, order_norm, pair,
                           quotient_by_subspace)


def two_generator_space():
    """Basis (e, w); generators e + w and e - w, so the unit is interior."""
    space = StarSpace(["e", "w"], [1.0, 0.0])
    gens = [space.element([1.0, 1.0]), space.element([1.0, -1.0])]
    return space, gens


def random_psd(n, rng, rank=None):
    a = rng.standard_normal((n, rank or n)) + 1j * rng.standard_normal((n, rank or n))
    return a @ a.conj().T


def conjugated_direct_sum(alpha, vs):
    """``alpha^* (v_1 ⊕ ... ⊕ v_m) alpha`` by explicit block assembly."""
    out = vs[0].as_matrix()
    for v in vs[1:]:
        out = out.direct_sum(v.as_matrix())
    return out.conjugate(alpha)


# ------------------------------------------------------------ spaces


def test_space_validation():
    with pytest.raises(ValueError):
        StarSpace(["a", "b"], [1.0])
    with pytest.raises(ValueError):
        StarSpace(["a", "b"], [1.0, 0.0], involution=[[0, 2], [1, 0]])
    swap = StarSpace(["a", "b"], [1.0, 1.0], involution=[[0, 1], [1, 0]])
    assert not swap.hermitian_basis
    v = swap.element([1.0, 2.0j])
    assert np.allclose(v.star().coeffs, [-2.0j, 1.0])
    with pytest.raises(ValueError, match="hermitian"):
        MaxCone(swap, [swap.unit])


def test_matrix_element_algebra(rng):
    space, (g1, g2) = two_generator_space()
    x = MatrixElement.from_entries(space, [[g1, g2], [g2, g1]])
    assert x.level == 2 and x.entry(0, 1).allclose(g2)
    assert x.is_hermitian()
    a = rng.standard_normal((2, 2))
    assert x.kron_left(a).level == 4 and x.kron_right(a).level == 4
    assert x.shuffle(2, 1).allclose(x)
    assert (x + x - 2 * x).allclose(space.zero(2))
    with pytest.raises(ValueError):
        x + space.zero(3)


# ------------------------------------------------ normal-form equivalence


def test_normal_form_reproduces_conjugated_direct_sums(rng):
    """``sum_j g_j ⊗ S_j`` with PSD ``S_j`` equals ``a^*(⊕ v)a`` for the
    factorization ``S_j = sum_r w_r w_r^*``, and both are MaxCone members."""
    space, gens = two_generator_space()
    cone = MaxCone(space, gens)
    for n in (1, 2, 3):
        S = [random_psd(n, rng) for _ in gens]
        normal = sum((MatrixElement.from_scalar(Sj, g) for Sj, g in zip(S, gens)), space.zero(n))
        rows, vs = [], []
        for Sj, g in zip(S, gens):
            w, V = np.linalg.eigh(Sj)
            for lam, vec in zip(w, V.T):
                rows.append(np.sqrt(max(lam, 0.0)) * vec.conj())
                vs.append(g)
        alpha = np.array(rows)
        brute = conjugated_direct_sum(alpha, vs)
        assert brute.allclose(normal, atol=1e-9)
        assert cone.membership(normal).is_member


def test_conjugated_direct_sums_are_members(rng):
    space, gens = two_generator_space()
    cone = MaxCone(space, gens)
    for n in (1, 2, 3):
        m = 3
        vs = [sum((rng.random() * g for g in gens), space.zero()) for _ in range(m)]
        alpha = rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
        x = conjugated_direct_sum(alpha, vs)
        assert cone.membership(x).is_member


def test_max_cone_certificate_is_a_valid_separator(rng):
    space, gens = two_generator_space()
    cone = MaxCone(space, gens)
    x = MatrixElement.from_scalar(random_psd(2, rng), gens[0]) - 50.0 * space.unit_matrix(2)
    v = cone.membership(x)
    assert v.is_non_member
    Y = v.certificate.data["functional"]
    assert pair(Y, x) < 0
    # nonnegative on every g ⊗ S with S PSD  <=>  sum_b g_b Y_b is PSD
    for g in gens:
        assert min_eig(np.einsum("b,bij->ij", g.coeffs, Y)) >= -1e-7


def test_max_cone_level_one_lp(rng):
    space, gens = two_generator_space()
    cone = MaxCone(space, gens)
    assert cone.membership(space.element([1.0, 0.5])).is_member
    bad = cone.membership(space.element([1.0, 2.0]))
    assert bad.is_non_member
    y = bad.certificate.data["functional"].reshape(-1)
    assert y @ np.array([1.0, 2.0]) < 0 and all(y @ g.coeffs >= -1e-9 for g in gens)


# --------------------------------------------------- concrete diagonal cones


def test_diagonal_cone_matches_max_cone_on_commutative_models(rng):
    model = DiagonalModel.full(3)
    concrete = DiagonalCone(model)
    maximal = MaxCone(model.space, concrete.ground_generators())
    agree = 0
    for _ in range(15):
        X = np.stack([random_hermitian(2, rng) for _ in range(3)])
        X[0] += 2.0 * np.eye(2)
        x = MatrixElement(model.space, X)
        a, b = concrete.membership(x), maximal.membership(x)
        if abs(min(min_eig(B) for B in model.image(x))) < 1e-5:
            continue
        assert a.is_member == b.is_member
        agree += 1
    assert agree >= 10


def test_diagonal_model_from_generators():
    diags = np.array([[1, 1, 0, 0], [0, 0, 1, 1], [1, 0, 1, 0], [0, 1, 0, 1]], dtype=float)
    model, gens = DiagonalModel.from_generators(diags)
    assert model.space.dim == 3
    assert np.allclose(model.image(gens[3]), diags[3])
    with pytest.raises(ValueError):
        model.coords([1, 0, 0, 0])
    with pytest.raises(ValueError, match="identity"):
        DiagonalModel.from_generators(np.array([[1.0, 0.0, 0.0]]))


def test_diagonal_cone_extreme_rays():
    model = DiagonalModel.full(3)
    rays = DiagonalCone(model).ground_generators()
    assert sorted(tuple(r.coeffs) for r in rays) == sorted(tuple(r) for r in np.eye(3))


def test_diagonal_cone_certificate(rng):
    model = DiagonalModel.full(2)
    cone = DiagonalCone(model)
    x = MatrixElement(model.space, np.stack([np.eye(2), np.array([[1.0, 2.0], [2.0, 1.0]])]))
    v = cone.membership(x)
    assert v.is_non_member and np.isclose(v.certificate.data["value"], -1.0)
    assert pair(v.certificate.data["functional"], x) < 0


# ------------------------------------------------------ archimedean, norms


def test_archimedean_closure_within_schedule():
    model = DiagonalModel.full(2)
    cone = DiagonalCone(model)
    assert archimedean_membership(cone, model.coords([1.0, 0.0])).is_member
    v = archimedean_membership(cone, model.coords([1.0, -0.05]))
    assert v.is_non_member and v.certificate.data["eps"] == pytest.approx(1e-2)
    assert ArchimedeanClosure(cone, (0.5, 0.1)).membership(model.coords([1.0, -0.05])).is_member
    with pytest.raises(ValueError):
        ArchimedeanClosure(cone, (0.1, 0.5))


def test_order_norm_in_diagonal_model():
    model = DiagonalModel.full(3)
    cone = DiagonalCone(model)
    v = model.coords([3.0, -1.0, 0.5])
    assert order_norm(model.space, cone, v) == pytest.approx(3.0, abs=1e-6)
    lp = MaxCone(model.space, cone.ground_generators())
    assert order_norm(model.space, lp, v) == pytest.approx(3.0, abs=1e-6)


def test_quotient_by_subspace():
    space = StarSpace(["e", "a", "b"], [1.0, 0.0, 0.0])
    q = quotient_by_subspace(space, [[0.0, 1.0, 1.0]])
    assert q.space.dim == 2
    assert q.project([0.0, 1.0, 1.0]).allclose(q.space.zero())
    assert q.project(space.unit.coeffs).allclose(q.space.unit)
    with pytest.raises(ValueError, match="unit"):
        quotient_by_subspace(space, [[1.0, 0.0, 0.0]])
