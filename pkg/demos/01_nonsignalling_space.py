"""The universal nonsignalling space for small scenarios.

Builds the quotient space for a few (inputs, outputs) pairs, prints the
dimension next to (n(k-1)+1)^2, and maps it into the diagonal model where
every generator becomes a 0/1 diagonal matrix.
"""

import numpy as np

from aouqc.linalg import exact_rank
from aouqc.nonsignalling import Scenario, build_commutative_model, build_ns_space, universal_map

for n, k in [(1, 2), (2, 2), (2, 3), (3, 2), (3, 3)]:
    s = Scenario(n, k)
    ns = build_ns_space(s)
    print(f"n={n} k={k}: {s.n_generators:3d} generators, dimension {ns.dim:2d} "
          f"(formula {s.ns_dim}), {ns.relation_rank} independent relations")

s = Scenario(2, 2)
ns = build_ns_space(s)
print("\nbasis for n=k=2:", ", ".join(ns.space.labels))

# every generator is a sum of basis elements with integer coefficients
print("Q(2,2|1,1) in basis coordinates:", ns.Q(2, 2, 1, 1).coeffs.astype(int))

cm = build_commutative_model(s)
phi = universal_map(ns, cm.generators)
image = cm.model.H @ phi.matrix
print(f"\ndiagonal model: {cm.model.size} positions, map rank {exact_rank(np.round(image).astype(int))}")
print("unital:", phi.is_unital())
# Q(a,b|x,y) is the product of the two marginal projections
a, b, x, y = 0, 1, 1, 0
lhs = cm.diagonals[s.index(x, y, a, b)]
print("Q = E F on the diagonal:", np.array_equal(lhs, cm.E_diag(a, x) * cm.F_diag(b, y)))
