"""Level cones and hat operators on small diagonal models.

First, for the contraction diag(0.7, 0) (not a projection) a handful of
random elements are tested against the level-L cones, L = 1..3; membership
never disappears as L grows.  Second, for two commuting projections in the
diagonal 4x4 matrices the plain and hat compression cones are compared with
ordinary positivity.
"""

import numpy as np

from aouqc.compression import (ContractionTuple, ScheduleParams, compression_membership, hat_weights,
                               level_membership, tensor_ones, transported_hat_check)
from aouqc.ordered import DiagonalCone, DiagonalModel, SpaceElement

params = ScheduleParams(eps=(1e-1, 1e-2, 1e-3, 1e-4))
rng = np.random.default_rng(3)

model = DiagonalModel.full(2)
cone = DiagonalCone(model)
tup = ContractionTuple(model.space, [model.coords([0.7, 0.0])], cone)
print("element            L=1        L=2        L=3")
for _ in range(6):
    x = SpaceElement(model.space, rng.standard_normal(2))
    row = [str(level_membership(cone, tup, x, L, params).status) for L in (1, 2, 3)]
    print(f"{np.round(x.coeffs, 3)!s:18} " + " ".join(f"{v:10}" for v in row))

model = DiagonalModel.full(4)
cone = DiagonalCone(model)
tup = ContractionTuple(model.space, [model.coords([1, 1, 0, 0]), model.coords([1, 0, 1, 0])], cone)
print("\nelement                      positive  plain      hat        transported")
for _ in range(6):
    x = SpaceElement(model.space, rng.standard_normal(4) + 1.0)
    lifted = tensor_ones(x, tup.N)
    plain = compression_membership(cone, tup, lifted, params)
    hat = compression_membership(cone, tup, lifted, params, hat=True, eps_weights=hat_weights(tup.N))
    moved = transported_hat_check(cone, tup, lifted, hat) if hat.is_member else "-"
    print(f"{np.round(x.coeffs, 2)!s:28} {str(cone.contains(x)):9} {str(plain.status):10} "
          f"{str(hat.status):10} {moved}")
