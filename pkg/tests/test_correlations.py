import itertools

import numpy as np
import pytest

from aouqc.correlations import (Correlation, bell_value, chsh, format_correlation, is_local,
                                is_nonsignalling_direct, maximize_over_local, maximize_over_ns,
                                ns_state_membership, parse_correlation, parse_functional, pr_box,
                                qc_outer_membership, random_nonsignalling, random_valid, uniform,
                                validate)
from aouqc.nonsignalling import Scenario, build_ns_space

S22 = Scenario(2, 2)


def tsirelson() -> Correlation:
    """The optimal quantum CHSH correlation, value 2 sqrt 2."""
    p = np.zeros((2, 2, 2, 2))
    for x, y, a, b in itertools.product(range(2), repeat=4):
        agree = (a ^ b) == (x & y)
        p[x, y, a, b] = (2 + np.sqrt(2) * (1 if agree else -1)) / 8
    return Correlation(S22, p)


def brute_local_max(c: np.ndarray) -> float:
    """Best deterministic strategy by direct enumeration of output tables."""
    best = -np.inf
    for a0, a1, b0, b1 in itertools.product(range(2), repeat=4):
        alice, bob = (a0, a1), (b0, b1)
        best = max(best, sum(c[x, y, alice[x], bob[y]] for x in range(2) for y in range(2)))
    return best


def test_file_round_trip():
    p = pr_box()
    q = parse_correlation("# comment\n" + format_correlation(p))
    assert np.array_equal(p.p, q.p)


@pytest.mark.parametrize("text, msg", [
    ("", "empty"),
    ("scenario 2\n", "line 1"),
    ("scenario 2 2\n1 1 1\n", "line 2: expected"),
    ("scenario 2 2\n1 1 3 1 0.5\n", "line 2: field a=3"),
    ("scenario 2 2\n1 1 1 1 0.5\n1 1 1 1 0.5\n", "line 3: duplicate"),
    ("scenario 2 2\n1 1 1 1 half\n", "line 2: could not parse"),
])
def test_parse_errors_have_line_diagnostics(text, msg):
    with pytest.raises(ValueError, match=msg):
        parse_correlation(text)


def test_validate():
    assert validate(pr_box()) == []
    bad = Correlation(S22, pr_box().p * 0.5)
    assert len(validate(bad)) == 4
    neg = pr_box().p.copy()
    neg[0, 0, 0, 0], neg[0, 0, 0, 1] = -0.1, 0.1
    assert any("negative" in e for e in validate(Correlation(S22, neg)))


def test_nonsignalling_oracles_on_known_points():
    ns = build_ns_space(S22)
    for p in (pr_box(), uniform(S22), tsirelson()):
        assert is_nonsignalling_direct(p)[0]
        assert ns_state_membership(p, ns).is_member
    sig = np.zeros((2, 2, 2, 2))
    for x in range(2):
        for y in range(2):
            sig[x, y, y, 0] = 1.0  # Alice outputs Bob's input
    sig = Correlation(S22, sig)
    assert not is_nonsignalling_direct(sig)[0]
    v = ns_state_membership(sig, ns)
    assert v.is_non_member and ("G(" in v.note or "H(" in v.note)


def test_random_generators_are_as_advertised(rng):
    for _ in range(20):
        assert validate(random_valid(S22, rng)) == []
        q = random_nonsignalling(Scenario(2, 3), rng)
        assert validate(q) == [] and is_nonsignalling_direct(q)[0]


def test_locality():
    loc = is_local(uniform(S22))
    assert loc.is_member
    w = loc.certificate.data["weights"]
    assert np.isclose(w.sum(), 1.0) and np.all(w >= -1e-12)
    for p, value in ((pr_box(), 4.0), (tsirelson(), 2 * np.sqrt(2))):
        v = is_local(p)
        assert v.is_non_member
        f = v.certificate.data["functional"]
        assert brute_local_max(f) == pytest.approx(2.0, abs=1e-9)
        assert np.sum(f * p.p) == pytest.approx(v.certificate.data["value"])
        assert v.certificate.data["value"] > 2.0 + 1e-6
    assert is_local(pr_box()).certificate.data["value"] == pytest.approx(4.0)


def test_chsh_optima():
    f = chsh()
    assert brute_local_max(f.c) == 2.0
    assert maximize_over_local(f)[0] == pytest.approx(2.0, abs=1e-12)
    val, arg = maximize_over_ns(f)
    assert val == pytest.approx(4.0, abs=1e-9)
    assert bell_value(arg, f) == pytest.approx(4.0, abs=1e-9)
    assert bell_value(tsirelson(), f) == pytest.approx(2 * np.sqrt(2))


def test_functional_parsing():
    f = parse_functional("scenario 1 2\n1 1 1 1 1\n1 1 2 2 -1\n")
    assert f.c[0, 0, 0, 0] == 1 and f.c[0, 0, 1, 1] == -1


def test_qc_outer_verdicts():
    ns = build_ns_space(S22)
    v = qc_outer_membership(pr_box(), ns)
    assert v.is_unknown and v.certificate.kind == "budget"
    assert qc_outer_membership(uniform(S22), ns).is_member
    sig = Correlation(S22, np.tile(np.array([[1.0, 0.0], [0.0, 0.0]]), (2, 2, 1, 1)))
    sig.p[1, :, :, :] = [[0, 0], [1, 0]]  # Alice's output depends on x only, still nonsignalling
    assert qc_outer_membership(sig, ns).is_member
    bad = np.zeros((2, 2, 2, 2))
    bad[:, 0, 0, 0] = 1.0
    bad[:, 1, 1, 0] = 1.0
    with pytest.raises(ValueError, match="signalling"):
        qc_outer_membership(Correlation(S22, bad), ns)


def test_qc_outer_probe_path_single_input():
    """Without the local shortcut the level-1 probe battery decides (n = 1)."""
    s = Scenario(1, 2)
    ns = build_ns_space(s)
    v = qc_outer_membership(uniform(s), ns, shortcut_local=False, n_random=4)
    assert v.is_member and v.note == "Member-at-L=1"
