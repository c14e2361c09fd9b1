import json
import subprocess
import sys
from pathlib import Path

import pytest

from dlverify.cli import main

PROBLEMS = Path(__file__).resolve().parent.parent / "problems"


def run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr().out
    return code, out


class TestProve:
    def test_braking_proves_and_checks(self, capsys, tmp_path):
        proof = tmp_path / "braking.dlp"
        code, out = run_cli(["prove", str(PROBLEMS / "braking.dl"),
                             "--emit-proof", str(proof)], capsys)
        assert code == 0 and "proved" in out
        code, out = run_cli(["check", str(proof)], capsys)
        assert code == 0 and "checked" in out

    def test_inconclusive_gets_exit_two(self, capsys):
        code, out = run_cli(["prove", str(PROBLEMS / "nonlinear2d.dl")],
                            capsys)
        assert code == 2
        assert "inconclusive" in out

    def test_tactic_file(self, capsys, tmp_path):
        code, out = run_cli(["prove", str(PROBLEMS / "nonlinear2d.dl"),
                             "--tactic", str(PROBLEMS / "nonlinear2d.dlt")],
                            capsys)
        assert code == 0

    def test_missing_file_is_usage_error(self, capsys):
        code, _ = run_cli(["prove", "no/such/file.dl"], capsys)
        assert code == 3


class TestCheck:
    def test_tampered_proof_fails(self, capsys, tmp_path):
        proof = tmp_path / "p.dlp"
        run_cli(["prove", str(PROBLEMS / "braking.dl"),
                 "--emit-proof", str(proof)], capsys)
        doc = json.loads(proof.read_text())
        doc["nodes"][2]["sequent"]["succ"][0] = "1>=0"
        proof.write_text(json.dumps(doc))
        code, out = run_cli(["check", str(proof)], capsys)
        assert code == 1 and "check failed" in out


class TestFalsify:
    def test_refutation_exit_code(self, capsys):
        code, out = run_cli(["falsify", str(PROBLEMS / "braking_noassume.dl"),
                             "--seed", "5"], capsys)
        assert code == 1
        assert "counterexample" in out

    def test_proved_file_yields_no_counterexample(self, capsys):
        code, out = run_cli(["falsify", str(PROBLEMS / "braking.dl"),
                             "--budget", "40"], capsys)
        assert code == 0
        assert "no counterexample" in out


class TestQe:
    def test_quadratic(self, capsys):
        code, out = run_cli(["qe", "exists x . a*x^2+b*x+c=0"], capsys)
        assert code == 0
        assert "b^2" in out.replace(" ", "")

    def test_degree_error(self, capsys):
        code, out = run_cli(["qe", "exists x . x^3+a=0"], capsys)
        assert code == 4


class TestSimCommand:
    def test_csv_out(self, capsys, tmp_path):
        out_file = tmp_path / "trace.csv"
        code, out = run_cli(["sim", str(PROBLEMS / "braking.dl"),
                             "--seed", "2", "--init", "v=1", "--init", "b=1",
                             "--out", str(out_file)], capsys)
        assert code == 0
        assert out_file.exists() and "ode-step" in out_file.read_text()


class TestCompileAutomaton:
    def test_ball(self, capsys):
        code, out = run_cli(["compile-automaton",
                             str(PROBLEMS / "ball_automaton.dl")], capsys)
        assert code == 0
        assert "q:=0" in out


class TestDeterminism:
    def test_identical_argv_identical_stdout(self):
        cmd = [sys.executable, "-m", "dlverify.cli", "falsify",
               str(PROBLEMS / "braking_noassume.dl"), "--seed", "9", "--json"]
        a = subprocess.run(cmd, capture_output=True, text=True).stdout
        b = subprocess.run(cmd, capture_output=True, text=True).stdout
        assert a == b and a


class TestJsonOutput:
    def test_line_delimited_json(self, capsys):
        code, out = run_cli(["--json", "prove", str(PROBLEMS / "braking.dl")],
                            capsys)
        assert code == 0
        lines = [json.loads(line) for line in out.splitlines() if line]
        assert any(doc.get("status") == "proved" for doc in lines)
