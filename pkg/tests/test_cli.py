import json

import pytest

from resonantcl.cli import main

TINY = """
[scenario]
name = tiny
[model]
family = resonant
[domain]
x_min = -1
x_max = 1
y_min = -1
y_max = 1
[initial]
kind = blocks
blocks = {blocks}
[solver]
epsilon = 0.03125
balance_c = 2
nx = 64
t_end = 0.05
output_times = 0.025 0.05
[sweep]
eps0 = 0.03125
grid_ratio = 2
test_centers = 0 0
test_radius = 0.5
"""


@pytest.fixture
def tiny_ini(tmp_path):
    p = tmp_path / "tiny.ini"
    p.write_text(TINY.format(blocks="-0.2 0.2 -0.2 0.2 1.0"))
    return p


def test_run_writes_snapshots(tiny_ini, tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["run", str(tiny_ini), "--out", str(out)]) == 0
    assert (out / "monitors.csv").exists() and (out / "u_t0.05.csv").exists()
    assert "state range" in capsys.readouterr().out


def test_sweep_then_report(tiny_ini, tmp_path, capsys):
    out = tmp_path / "sweep"
    assert main(["sweep", str(tiny_ini), "--out", str(out)]) == 0
    data = json.loads((out / "report.json").read_text())
    assert data["scenario"] == "tiny"
    capsys.readouterr()
    assert main(["report", str(out)]) == 0
    assert "pairwise L1" in capsys.readouterr().out
    assert main(["report", str(out / "report.json"), "--csv"]) == 0
    assert capsys.readouterr().out.startswith("level,epsilon,delta,nx")


def test_scenarios_listing(capsys):
    assert main(["scenarios", "--validate"]) == 0
    out = capsys.readouterr().out
    assert "checkerboard_resonant" in out and "UNEXPECTED" not in out


def test_flagged_sweep_exits_with_one(tmp_path, capsys):
    p = tmp_path / "wide.ini"
    p.write_text(TINY.format(blocks="-0.6 0.6 -0.6 0.6 1.0")
                 .replace("balance_c = 2", "balance_c = 4").replace("grid_ratio = 2", "grid_ratio = 4"))
    assert main(["sweep", str(p), "--out", str(tmp_path / "o")]) == 1
    assert "sweep failed" in capsys.readouterr().err


def test_errors_exit_with_two(tmp_path, capsys):
    assert main(["run", "no_such_scenario"]) == 2
    assert main(["sweep", "linear_control", "--out", str(tmp_path / "o")]) == 2
    assert main(["report", str(tmp_path / "missing")]) == 2
    assert "error:" in capsys.readouterr().err
