import json
import pathlib
import subprocess
import sys

import pytest

from lsimdp.cli import flatten, run

MODEL = str(pathlib.Path(__file__).resolve().parents[1] / "demos" / "sec6.json")


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_validate_ok(capsys):
    code, out, _ = call(capsys, "validate", MODEL)
    assert code == 0 and json.loads(out)["factorized"] is True


def test_validate_broken_row(tmp_path, capsys):
    d = json.loads(pathlib.Path(MODEL).read_text())
    d["factored"]["p_unobs"][1][1] = [0.5, 0.4]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(d))
    code, out, err = call(capsys, "validate", str(bad))
    assert code == 1 and out == ""
    assert "p_unobs row (1, 1)" in err


def test_missing_model_file(capsys):
    code, _, err = call(capsys, "validate", "/nonexistent/model.json")
    assert code == 1 and "cannot read" in err


@pytest.mark.parametrize("argv", [[], ["bogus"], ["solve", MODEL], ["solve", MODEL, "--method", "x"],
                                  ["simulate", MODEL, "--policy", "virtual", "--episodes", "0"]])
def test_usage_errors(capsys, argv):
    code, out, err = call(capsys, *argv)
    assert code == 3 and out == "" and "usage:" in err


def test_solve_virtual_policy_file(tmp_path, capsys):
    pol = tmp_path / "p.json"
    code, out, _ = call(capsys, "solve", MODEL, "--method", "virtual", "--policy-out", str(pol))
    assert code == 0
    assert json.loads(pol.read_text()) == {"0": 1, "1": 1}
    doc = json.loads(out)
    assert doc["result"]["weighted_value"] == pytest.approx(1.25, abs=1e-7)
    assert doc["settings"] == {"tol": 1e-8, "accuracy": 1e-4, "quant_tol": 1e-6}


def test_table_and_json_carry_same_numbers(capsys):
    _, js, _ = call(capsys, "solve", MODEL, "--method", "full")
    _, table, _ = call(capsys, "--format", "table", "solve", MODEL, "--method", "full")
    expected = [f"{k}  {v}" for k, v in flatten(json.loads(js))]
    got = [" ".join(line.split()) for line in table.splitlines()]
    assert got == [" ".join(e.split()) for e in expected]
    _, table2, _ = call(capsys, "solve", MODEL, "--method", "full", "--format", "table")
    assert table2 == table


def test_constrained_and_belief_dp(tmp_path, capsys):
    code, out, _ = call(capsys, "solve", MODEL, "--method", "constrained")
    doc = json.loads(out)
    assert code == 0 and doc["result"]["dual"]["policy"] == {"0": 0, "1": 0}
    pol = tmp_path / "b.json"
    code, out, _ = call(capsys, "solve", MODEL, "--method", "belief-dp", "--accuracy", "1e-2", "--policy-out", str(pol))
    assert code == 0 and json.loads(pol.read_text())["method"] == "belief-dp"
    code, out, _ = call(capsys, "simulate", MODEL, "--policy", str(pol), "--episodes", "200")
    doc = json.loads(out)
    assert doc["result"]["policy_kind"] == "belief-feedback"
    assert doc["settings"]["horizon"] == 9  # 4 * 0.5**9 <= 1e-2


def test_simulate_csv_and_out(tmp_path, capsys):
    csv_path, out_path = tmp_path / "e.csv", tmp_path / "r.json"
    code, out, _ = call(capsys, "simulate", MODEL, "--policy", "virtual", "--episodes", "50",
                        "--objective", "both", "--episodes-csv", str(csv_path), "--out", str(out_path))
    assert code == 0 and out == ""
    doc = json.loads(out_path.read_text())
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "episode,true_total,belief_total" and len(lines) == 51
    mean = sum(float(line.split(",")[1]) for line in lines[1:]) / 50
    assert mean == pytest.approx(doc["result"]["mean"], rel=1e-12)
    assert doc["settings"]["seed"] == 0 and doc["settings"]["episodes"] == 50


def test_simulate_full_information_policy_file(tmp_path, capsys):
    pol = tmp_path / "f.json"
    call(capsys, "solve", MODEL, "--method", "full", "--policy-out", str(pol))
    code, out, _ = call(capsys, "simulate", MODEL, "--policy", str(pol), "--episodes", "100")
    assert code == 0 and json.loads(out)["result"]["policy_kind"] == "full-information"


def test_bad_policy_file(tmp_path, capsys):
    pol = tmp_path / "p.json"
    pol.write_text(json.dumps({"0": 1}))
    code, _, err = call(capsys, "simulate", MODEL, "--policy", str(pol))
    assert code == 1 and "policy" in err


def test_solver_error_exit_code(tmp_path, capsys):
    pol = tmp_path / "b.json"
    pol.write_text(json.dumps({"method": "belief-dp", "accuracy": 1e-2, "quant_tol": 1e-6}))
    out_path = tmp_path / "r.json"
    code, _, err = call(capsys, "simulate", MODEL, "--policy", str(pol), "--horizon", "30", "--episodes", "10",
                        "--out", str(out_path))
    assert code == 2 and "KeyNotCovered" in err
    assert not out_path.exists() and not list(tmp_path.glob(".tmp-*"))


def test_bounds_command(capsys):
    code, out, _ = call(capsys, "bounds", MODEL, "--depth", "4", "--graph")
    doc = json.loads(out)
    assert code == 0
    g = doc["gap_constants"]
    assert (g["c_bar"], g["c_under"], g["c_cap"]) == (pytest.approx(1.8), pytest.approx(-1.8), pytest.approx(3.6))
    assert doc["full_info_gap"]["holds"] and doc["belief_gap"]["truncated"]
    assert doc["belief_graph"]["nodes"][0] == [0.5, 0.5]
    assert doc["settings"]["depth"] == 4


def test_help_lists_defaults():
    out = subprocess.run([sys.executable, "-m", "lsimdp.cli", "compare", "--help"], capture_output=True, text=True).stdout
    for frag in ("1e-08", "0.0001", "1e-06", "(default: 8)", "(default: 10000)", "(default: 0)"):
        assert frag in out


def test_compare_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    argv = ["compare", MODEL, "--episodes", "2000", "--accuracy", "1e-2"]
    assert run(argv + ["--out", str(a)]) == 0
    assert run(argv + ["--out", str(b)]) == 0
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert "timings_seconds" not in doc and doc["settings"]["episodes"] == 2000
