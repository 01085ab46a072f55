import json

import pytest

from gburgers import cli
from gburgers.cli import AnalysisReport, main
from gburgers.expr import ZERO_LOG


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_classify_constant_coefficient(capsys):
    code, out = run(capsys, "classify", "--f", "1")
    assert code == 0
    assert "g^{5}" in out.out and "dim 5" in out.out


def test_classify_exponential(capsys):
    code, out = run(capsys, "classify", "--f", "exp(-x)")
    assert code == 0
    assert "case g^{2.5}  dim 2" in out.out


def test_classify_without_symmetry(capsys):
    code, out = run(capsys, "classify", "--f", "exp(t+x^2)")
    assert code == 0
    assert "trivial" in out.out


def test_analyze_all_sections(capsys):
    code, out = run(capsys, "analyze", "--f", "x^2", "--all")
    assert code == 0
    assert "g^{2.2}" in out.out
    assert "exp(2*t)" in out.out


def test_verify_solution(capsys):
    code, out = run(capsys, "verify-solution", "--f", "1", "--u", "2*exp(x-t)/(1+exp(x-t))")
    assert code == 0
    assert "PASS" in out.out


def test_verify_non_solution(capsys):
    code, out = run(capsys, "verify-solution", "--f", "1", "--u", "x^2")
    assert "FAIL" in out.out


def test_operators_with_heat_triple(capsys):
    code, out = run(capsys, "operators", "--f", "1", "--heat-triple", "1; x; x^2-2*t")
    assert code == 0
    assert "(0, 0, 0)" in out.out


@pytest.mark.parametrize("argv", [
    ["classify", "--f", "x^^2"],
    ["classify", "--f", "foo(x)"],
    ["classify", "--f", "x", "--domain", "t:2..1"],
    ["verify-solution", "--f", "1", "--u", "(x"],
])
def test_bad_input_exits_with_one(capsys, argv):
    code, out = run(capsys, *argv)
    assert code == 1
    assert out.err.startswith("error:")


def test_inconclusive_zero_test_exits_with_two(capsys, monkeypatch):
    real = cli.cmd_classify

    def noisy(args):
        report = real(args)
        ZERO_LOG.inconclusive.append("forced")
        return report

    monkeypatch.setattr(cli, "cmd_classify", noisy)
    code, _ = run(capsys, "classify", "--f", "x^2")
    assert code == 2


def test_json_report_round_trip(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, _ = run(capsys, "analyze", "--f", "x^2/t", "--conserve", "--json", str(path))
    assert code == 0
    data = json.loads(path.read_text())
    assert data["schema"] == 1
    report = AnalysisReport.from_json(path.read_text())
    assert AnalysisReport.from_json(report.to_json()) == report
    assert report.to_dict() == data
