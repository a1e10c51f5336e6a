import json
import subprocess
import sys

import pytest

from bipartite_prim.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_curve(capsys, tmp_path):
    code, out, _ = run(capsys, "curve", "--theta", "0.7", "--points", "3")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "s,lambda,rho" and len(lines) == 4
    path = tmp_path / "c.csv"
    assert main(["curve", "--theta", "0.1", "--out", str(path)]) == 0
    assert len(path.read_text().splitlines()) == 513


def test_simulate_csv_and_tolerance(capsys, tmp_path):
    out_file = tmp_path / "r.csv"
    code, _, _ = run(capsys, "simulate", "sublinear", "--nb", "40", "--nw", "40", "--trials", "3",
                     "--seed", "5", "--out", str(out_file))
    assert code == 0
    header, row = out_file.read_text().splitlines()
    assert header == "theta,n,regime,k_or_s,trials,mean,std,ci_low,ci_high,theory,abs_err"
    code, _, err = run(capsys, "simulate", "sublinear", "--nb", "40", "--nw", "40", "--trials",
                       "3", "--tol", "0")
    assert code == 1 and "tolerance" in err


def test_simulate_linear_json(capsys):
    code, out, _ = run(capsys, "simulate", "linear", "--theta", "0.3", "--n", "200", "--s", "0.3",
                       "0.6", "--trials", "2", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert [d["k_or_s"] for d in data] == [0.3, 0.6]
    assert data[0]["theta"] == 0.3 and data[0]["n"] == 200


def test_simulate_from_config(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"targets": [[10, 30]], "regime": "sublinear", "trials": 2,
                               "kappa": "sqrt"}))
    code, out, _ = run(capsys, "simulate", "--config", str(cfg))
    assert code == 0
    assert out.splitlines()[1].startswith("0.25,40,sublinear,6,2,")


def test_bad_config_exit_2(capsys, tmp_path):
    assert run(capsys, "simulate", "sublinear")[0] == 2
    assert run(capsys, "simulate", "sublinear", "--nb", "5", "--nw", "5", "--kappa", "99")[0] == 2
    assert run(capsys, "simulate", "linear", "--nb", "5", "--nw", "5", "--s", "1.5")[0] == 2
    assert run(capsys, "verify", "--seeds", "0")[0] == 2
    assert run(capsys, "dual", "--trials", "3")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "simulate", "--config", str(bad))[0] == 2


def test_verify(capsys):
    code, out, _ = run(capsys, "verify", "--max-size", "3", "--seeds", "3")
    assert code == 0 and "all pass" in out
    code, out, _ = run(capsys, "verify", "--max-size", "3", "--seeds", "3", "--corrupt")
    assert code == 1 and "failed at n_b=" in out


def test_bp(capsys):
    code, out, _ = run(capsys, "bp", "--theta", "0.5", "--lam", "2", "--trials", "8000",
                       "--tol", "0.03")
    assert code == 0
    data = json.loads(out)
    assert data["q1"] == pytest.approx(0.2031878, abs=1e-6)
    assert run(capsys, "bp", "--theta", "0.5", "--lam", "2", "--trials", "100", "--tol", "0")[0] == 1


def test_dual(capsys):
    code, out, _ = run(capsys, "dual", "--nb", "3", "--nw", "4", "--trials", "10", "--p", "0.5")
    assert code == 0 and "10/10" in out


def test_console_module_entry():
    res = subprocess.run([sys.executable, "-m", "bipartite_prim.cli", "curve", "--theta", "0.5",
                          "--points", "2"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.splitlines()[1].endswith(",0.5")
