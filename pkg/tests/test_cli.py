import json
import subprocess
import sys

import pytest

from hwaves.cli import main

FAST = ["--grid", "32", "--steps", "40"]


def test_simulate_writes_csv(tmp_path, capsys):
    out = tmp_path / "cubic.csv"
    assert main(["simulate", "--model", "cubic", "--example", "1", "--eps", "0.1", "--out", str(out), *FAST]) == 0
    header = out.read_text(encoding="utf-8").splitlines()[0].split(",")
    assert header == ["t"] + [f"x_{j}" for j in range(32)]
    assert "wrote" in capsys.readouterr().out


def test_simulate_euler(tmp_path):
    out = tmp_path / "e.csv"
    assert main(["simulate", "--model", "euler", "--eps", "0.1", "--out", str(out), *FAST]) == 0
    assert len(out.read_text(encoding="utf-8").splitlines()) == 42


def test_converge_writes_reports(tmp_path):
    stem = tmp_path / "sweep"
    argv = ["converge", "--model", "linear", "--model", "quadratic", "--eps-list", "0.05,0.1,0.2",
            "--ref-grid", "32", "--ref-steps", "40", "--ref-method", "direct", "--out", str(stem), *FAST]
    assert main(argv) == 0
    data = json.loads((tmp_path / "sweep.json").read_text(encoding="utf-8"))
    assert set(data["models"]) == {"linear", "quadratic"}
    assert (tmp_path / "sweep.csv").read_text(encoding="utf-8").startswith("model,eps,error,slope_running\n")


def test_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("example = 3\neps = 0.05\ngrid = 32\nsteps = 20\nmodel = linear\n", encoding="utf-8")
    out = tmp_path / "o.csv"
    assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
    assert out.exists()


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as info:
        main(["simulate", "--bogus"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 2
    assert main(["simulate", "--grid", "31"]) == 2
    assert main(["simulate", "--example", "2", "--n", "4"]) == 2
    assert main(["validate", "--only", "99"]) == 2
    assert "error" in capsys.readouterr().err


def test_numerical_failure_exit_code(capsys):
    # unstable stratification grows every mode exponentially
    argv = ["simulate", "--model", "internal", "--atwood", "1", "--eps", "0.4", "--tfinal", "40", "--grid", "32", "--steps", "200"]
    assert main(argv) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_io_failure_exit_code(tmp_path):
    assert main(["simulate", "--out", str(tmp_path / "missing" / "x.csv"), *FAST]) == 4
    assert main(["simulate", "--config", str(tmp_path / "nope.cfg")]) == 4


def test_validate_exit_codes(capsys):
    assert main(["validate", "--only", "5"]) == 0
    assert main(["validate", "--only", "10"]) == 1
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("[PASS] criterion  5") and any(l.startswith("[FAIL] criterion 10") for l in lines)


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "hwaves.cli", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "simulate" in r.stdout
