"""Order-theoretic tools for abstract operator systems and bipartite correlations.

Submodules: ``linalg`` (matrix helpers), ``conic`` (LP and PSD-affine
feasibility with certificates), ``ordered`` (spaces, matrix levels, cones),
``compression`` (projection criteria), ``nonsignalling`` (the universal
nonsignalling space), ``correlations`` (classifiers and Bell optimization),
``verify`` (invariant suite) and ``cli``.
"""

from .compression import (BudgetExceeded, ContractionTuple, ScheduleParams, compression_membership,
                          inductive_membership, level_membership, projection_test)
from .conic import Certificate, Status, Verdict
from .correlations import (BellFunctional, Correlation, chsh, is_local, is_nonsignalling_direct,
                           maximize_over_local, maximize_over_ns, ns_state_membership, pr_box,
                           qc_outer_membership)
from .linalg import Tolerance
from .nonsignalling import NsSpace, Scenario, build_ns_space, dns_cone, dqc_cone, universal_map
from .ordered import (DiagonalCone, DiagonalModel, MatrixElement, MaxCone, SpaceElement, StarSpace,
                      archimedean_membership, order_norm)

__version__ = "0.1.0"
