"""One test per acceptance criterion, each at its stated tolerance.

Every test logs a single ``[PASS]`` or ``[FAIL]`` line, collected in the
"acceptance criteria" section of the pytest summary.
"""

import itertools
import subprocess
import sys
import time

import numpy as np
import pytest

from aouqc import verify
from aouqc.correlations import chsh, pr_box
from aouqc.nonsignalling import Scenario, build_ns_space

SEED = 7


def _check(result, acceptance_log):
    acceptance_log(result.line())
    assert result.passed, result.summary


@pytest.fixture(scope="module")
def concrete_runs():
    t0 = time.perf_counter()
    cone, tup, runs = verify._concrete_runs(SEED)
    return cone, tup, runs, time.perf_counter() - t0


def test_criterion_01_dimension_formula(acceptance_log):
    r = verify.dimension_formula(SEED)
    dims = {(row["n"], row["k"]): row["dim"] for row in r.payload["scenarios"]}
    assert dims == {(2, 2): 9, (2, 3): 25, (3, 2): 16, (3, 3): 49}
    assert all(row["basis_rank"] == row["dim"] for row in r.payload["scenarios"])
    _check(r, acceptance_log)


def test_criterion_02_commutative_isomorphism(acceptance_log):
    r = verify.commutative_isomorphism(SEED)
    assert all(row["rank"] == row["model_dim"] for row in r.payload["scenarios"])
    _check(r, acceptance_log)


def test_criterion_03_nonsignalling_equivalence(acceptance_log):
    r = verify.nonsignalling_equivalence(SEED)
    assert r.payload["samples"] == 1000 and r.payload["disagreements"] == []
    # both classes are well represented, so the equivalence is not vacuous
    assert 100 < r.payload["nonsignalling"] < 900
    _check(r, acceptance_log)


def test_criterion_04_polytope_values(acceptance_log):
    r = verify.polytope_values(SEED)
    # independent route: enumerate the 16 deterministic strategies by hand
    c = chsh().c
    brute = max(sum(c[x, y, al[x], bo[y]] for x in range(2) for y in range(2))
                for al in itertools.product(range(2), repeat=2)
                for bo in itertools.product(range(2), repeat=2))
    assert abs(brute - 2.0) <= 1e-9
    assert abs(r.payload["local_max"] - 2.0) <= 1e-9
    assert abs(r.payload["ns_max"] - 4.0) <= 1e-6
    f = r.payload["pr_local"].certificate.data["functional"]
    assert float(np.sum(f * pr_box().p)) > 2.0 + 1e-6
    _check(r, acceptance_log)


def test_criterion_05_concrete_case_equivalence(concrete_runs, acceptance_log):
    _, _, runs, elapsed = concrete_runs
    r = verify.concrete_equivalence(SEED, runs)
    r.elapsed += elapsed
    r.passed &= r.elapsed < 300.0
    assert len(runs) == 100
    # independent ground truth: a D_4 element is positive iff its entries are nonnegative
    for x, ground, _, _ in runs:
        assert ground.is_member == bool(np.all(x.coeffs >= 0))
    _check(r, acceptance_log)


def test_criterion_06_hat_containment(concrete_runs, acceptance_log):
    cone, tup, runs, _ = concrete_runs
    r = verify.hat_containment(SEED, cone, tup, runs)
    assert r.payload["hat_members"] > 0
    _check(r, acceptance_log)


def test_criterion_07_projection_detection(acceptance_log):
    r = verify.projection_detection(SEED)
    verdicts = {row["case"]: row["verdict"] for row in r.payload["cases"]}
    assert verdicts == {"diag(1,0)": "Pass", "(diag(1,0,0), diag(1,1,0))": "Pass",
                        "e/2": "Fail", "diag(0.9,0)": "Fail"}
    _check(r, acceptance_log)


def test_criterion_08_unitality_identities(acceptance_log):
    r = verify.unitality_identities(SEED)
    _check(r, acceptance_log)


def test_criterion_09_level_monotonicity(acceptance_log):
    r = verify.level_monotonicity(SEED)
    table = r.payload["table"]
    assert len(table) == 20 and all(len(row) == 4 for row in table)
    _check(r, acceptance_log)


def test_criterion_10_determinism(tmp_path, acceptance_log):
    """Two separate ``verify --seed 7`` processes write identical payloads."""
    t0 = time.perf_counter()
    outs = []
    for i in range(2):
        out = tmp_path / f"run{i}.json"
        proc = subprocess.run([sys.executable, "-m", "aouqc", "verify", "--suite", "core",
                               "--seed", str(SEED), "--out", str(out)],
                              capture_output=True, text=True)
        assert proc.returncode == 0, proc.stdout + proc.stderr
        outs.append(out.read_bytes())
    same = outs[0] == outs[1]
    r = verify.CriterionResult(10, "determinism", same,
                               f"two verify processes with seed {SEED} wrote "
                               f"{'identical' if same else 'different'} payloads ({len(outs[0])} bytes)",
                               time.perf_counter() - t0)
    _check(r, acceptance_log)
