import numpy as np
import pytest

from aouqc.conic import lineality_basis
from aouqc.linalg import exact_rank
from aouqc.nonsignalling import (QcCone, Scenario, build_commutative_model, build_ns_space, dns_cone,
                                 qc_tuple, relation_matrix, relation_vectors, universal_map)
from aouqc.ordered import SpaceElement

# relation ranks come from an exact rank computation of the relation matrix
FROZEN = {(1, 2): (4, 0), (2, 2): (9, 7), (2, 3): (25, 11), (3, 2): (16, 20), (3, 3): (49, 32)}


@pytest.mark.parametrize("nk", sorted(FROZEN))
def test_dimension_and_relation_rank(nk):
    s = Scenario(*nk)
    ns = build_ns_space(s)
    dim, rank = FROZEN[nk]
    assert ns.dim == dim == s.ns_dim
    R = relation_matrix(s)
    assert (exact_rank(R.astype(int)) if R.size else 0) == rank == ns.relation_rank


@pytest.mark.parametrize("nk", [(2, 2), (2, 3), (3, 2)])
def test_quotient_coordinates(nk):
    s = Scenario(*nk)
    ns = build_ns_space(s)
    assert np.allclose(ns.to_coords @ ns.basis_lift, np.eye(ns.dim))
    for rel in relation_vectors(s):
        assert np.allclose(ns.to_coords @ rel.vector, 0.0)
    # generators in each (x, y) block sum to the unit
    for x in range(s.n):
        for y in range(s.n):
            total = sum(ns.Q(a + 1, b + 1, x + 1, y + 1).coeffs for a in range(s.k) for b in range(s.k))
            assert np.allclose(total, ns.unit.coeffs)


def test_marginals_are_input_independent():
    ns = build_ns_space(Scenario(2, 2))
    e11 = ns.Q(1, 1, 1, 1) + ns.Q(1, 2, 1, 1)
    e12 = ns.Q(1, 1, 1, 2) + ns.Q(1, 2, 1, 2)
    assert e11.allclose(e12) and e11.allclose(ns.E(1, 1))


def test_universal_map_to_commutative_model_is_unital_and_injective():
    s = Scenario(2, 2)
    ns = build_ns_space(s)
    cm = build_commutative_model(s)
    phi = universal_map(ns, cm.generators)
    assert phi.is_unital() and phi.rank == ns.dim
    for i, g in enumerate(ns.generators()):
        assert np.allclose(cm.model.image(phi(g)), cm.diagonals[i])


def test_universal_map_reports_violated_relation():
    s = Scenario(2, 2)
    ns = build_ns_space(s)
    cm = build_commutative_model(s)
    targets = list(cm.generators)
    targets[0], targets[1] = targets[1], targets[0]
    with pytest.raises(ValueError, match="relation"):
        universal_map(ns, targets)


def test_dns_cone_basics():
    ns = build_ns_space(Scenario(2, 2))
    cone = dns_cone(ns)
    assert cone.membership(ns.unit).is_member
    assert cone.membership(ns.E(1, 1)).is_member
    assert cone.membership(-ns.Q(1, 1, 1, 1)).is_non_member
    assert lineality_basis([g.coeffs for g in ns.generators()]) == []
    assert qc_tuple(ns).N == 16


def test_qc_cone_shortcuts():
    ns = build_ns_space(Scenario(2, 2))
    cone = QcCone(ns)
    v = cone.membership(ns.unit)
    assert v.is_member and v.certificate.kind == "dns_member"
    w = cone.membership(-ns.unit)
    assert w.is_non_member and w.certificate.kind == "deterministic_state"
    assert len(w.certificate.data["enumeration"]) == 16


def test_qc_cone_budget_is_unknown():
    s = Scenario(2, 2)
    ns = build_ns_space(s)
    # 2e - CHSH: nonnegative on deterministic strategies, negative on the PR box
    chsh = sum((-1.0) ** (a ^ b ^ (x * y)) * ns.Q(a + 1, b + 1, x + 1, y + 1).coeffs
               for x, y, a, b in s.tuples())
    v = QcCone(ns).membership(SpaceElement(ns.space, 2 * ns.unit.coeffs - chsh))
    assert v.is_unknown and v.certificate.kind == "budget"
