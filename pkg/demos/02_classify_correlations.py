"""Classify a few two-input, two-output correlations.

For each correlation: is it a valid distribution, is it nonsignalling
(checked twice, once through marginals and once as a state on the
nonsignalling space), is it local, and what does the quantum commuting outer
test say at level 1.
"""

import itertools

import numpy as np

from aouqc.correlations import (Correlation, bell_value, chsh, is_local, is_nonsignalling_direct,
                                maximize_over_local, maximize_over_ns, ns_state_membership,
                                pr_box, qc_outer_membership, uniform, validate)
from aouqc.nonsignalling import Scenario, build_ns_space

s = Scenario(2, 2)
ns = build_ns_space(s)

tsirelson = np.zeros((2, 2, 2, 2))
for x, y, a, b in itertools.product(range(2), repeat=4):
    tsirelson[x, y, a, b] = (2 + np.sqrt(2) * (1 if (a ^ b) == (x & y) else -1)) / 8

signalling = np.zeros((2, 2, 2, 2))
for x, y in itertools.product(range(2), repeat=2):
    signalling[x, y, y, 0] = 1.0

cases = {
    "uniform": uniform(s),
    "PR box": pr_box(),
    "optimal quantum CHSH": Correlation(s, tsirelson),
    "Alice copies y": Correlation(s, signalling),
}

f = chsh()
print(f"CHSH maxima: local {maximize_over_local(f)[0]:.6g}, nonsignalling {maximize_over_ns(f)[0]:.6g}\n")

for name, p in cases.items():
    print(f"== {name}  (CHSH value {bell_value(p, f):.4f})")
    print("  valid:", not validate(p))
    direct = is_nonsignalling_direct(p)[0]
    state = ns_state_membership(p, ns)
    print("  nonsignalling (marginals / state):", direct, "/", state.is_member, state.note)
    if not direct:
        continue
    loc = is_local(p)
    if loc.is_non_member:
        d = loc.certificate.data
        print(f"  local: no, separating functional value {d['value']:.4f} > {d['local_max']:.4f}")
    else:
        print("  local: yes")
    qc = qc_outer_membership(p, ns)
    print(f"  qc outer, level 1: {qc.status} {qc.note}")
