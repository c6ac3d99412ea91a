import json

import pytest

from aouqc.cli import EXIT_DECIDED, EXIT_ERROR, EXIT_UNKNOWN, main, parse_model
from aouqc.correlations import format_correlation, format_functional, chsh, pr_box, uniform
from aouqc.nonsignalling import Scenario
from aouqc.report import loads


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, text in {
        "pr.corr": format_correlation(pr_box()),
        "uniform.corr": format_correlation(uniform(Scenario(2, 2))),
        "chsh.func": format_functional(chsh()),
        "broken.corr": "scenario 2 2\n1 1 1 9 0.5\n",
        "proj.model": "size 2\ncontraction 1 0\n",
        "half.model": "size 2\ncontraction 0.5 0.5\n",
        "bad.model": "size 2\ncontraction 1\n",
    }.items():
        p = tmp_path / name
        p.write_text(text)
        paths[name] = str(p)
    return paths


def test_classify_pr_box(files, capsys, tmp_path):
    out = tmp_path / "pr.json"
    code = main(["classify", "--scenario", "2", "2", "--in", files["pr.corr"], "--out", str(out)])
    text = capsys.readouterr().out
    assert code == EXIT_UNKNOWN
    assert "valid: yes" in text and "local: no (Bell witness 4 > 2)" in text
    assert "qc-outer-L1: Unknown(budget)" in text
    payload = loads(out.read_text())
    assert payload["report"]["local"]["status"] == "NonMember"
    # the NonMember verdict embeds its certificate
    assert payload["report"]["local"]["certificate"]["data"]["value"] == 4.0
    assert json.loads(out.read_text())["schema_version"] == 1


def test_classify_uniform_is_decided(files, capsys):
    assert main(["classify", "--in", files["uniform.corr"]]) == EXIT_DECIDED
    assert "Member-at-L=1" in capsys.readouterr().out


def test_classify_errors(files, capsys):
    assert main(["classify", "--in", files["broken.corr"]]) == EXIT_ERROR
    assert "line 2" in capsys.readouterr().err
    assert main(["classify", "--scenario", "3", "2", "--in", files["pr.corr"]]) == EXIT_ERROR
    assert main(["classify"]) == EXIT_ERROR
    assert main(["classify", "--in", "/nonexistent/file"]) == EXIT_ERROR


def test_space_info(capsys):
    assert main(["space-info", "--scenario", "2", "3"]) == EXIT_DECIDED
    text = capsys.readouterr().out
    assert "dimension: 25" in text and "relation rank: 11 (36 - 25 = 11" in text


def test_bell_opt(files, capsys):
    assert main(["bell-opt", "--in", files["chsh.func"]]) == EXIT_DECIDED
    text = capsys.readouterr().out
    assert "nonsignalling maximum: 4" in text and "local maximum: 2" in text


def test_projection_test_command(files, capsys):
    assert main(["projection-test", "--in", files["half.model"]]) == EXIT_DECIDED
    assert "verdict: Fail" in capsys.readouterr().out
    assert main(["projection-test", "--in", files["bad.model"]]) == EXIT_ERROR


def test_parse_model_diagnostics():
    with pytest.raises(ValueError, match="line 1"):
        parse_model("contraction 1 0\n")
    with pytest.raises(ValueError, match="unknown keyword"):
        parse_model("size 2\nfoo 1 2\n")
    model, ps = parse_model("size 3\nbasis 1 1 0\nbasis 0 0 1\ncontraction 1 1 0\n")
    assert model.space.dim == 2 and ps == [[1.0, 1.0, 0.0]]


def test_bad_schedule_is_an_error(capsys):
    assert main(["space-info", "--scenario", "2", "2", "--eps-schedule", "0.001,0.1"]) == EXIT_ERROR


def test_verify_fast_suite(capsys):
    assert main(["verify", "--suite", "fast", "--seed", "7"]) == EXIT_DECIDED
    text = capsys.readouterr().out
    assert "[PASS] 10. determinism" in text and "7/7 criteria passed" in text
