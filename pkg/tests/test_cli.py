import json
import shutil
import subprocess

import pytest

from secmec.cli import main
from secmec.experiments import read_sweep_csv


def test_usage_errors_exit_one():
    for argv in ([], ["frobnicate"], ["sweep", "--var", "p_beta"],
                 ["sweep", "--var", "watts", "--out", "x.csv"]):
        with pytest.raises(SystemExit) as err:
            main(argv)
        assert err.value.code == 1, argv


def test_sweep_value_spec_conflicts(tmp_path, capsys):
    out = tmp_path / "s.csv"
    rc = main(["sweep", "--var", "p_beta", "--values", "0,10", "--from", "0",
               "--to", "10", "--step", "5", "--out", str(out)])
    assert rc == 1
    rc = main(["sweep", "--var", "p_beta", "--from", "0", "--out", str(out)])
    assert rc == 1
    assert not out.exists()


def test_sweep_with_explicit_values(tmp_path, capsys):
    out = tmp_path / "s.csv"
    rc = main(["sweep", "--var", "p_beta", "--values", "0,30",
               "--schemes", "gpm-oma", "--reps", "1", "--seed", "1",
               "--lambda-grid", "0.05", "--out", str(out)])
    assert rc == 0
    assert "wrote" in capsys.readouterr().out
    meta, rows = read_sweep_csv(out)
    assert meta["variable"] == "p_beta_dbm"
    assert [r["value"] for r in rows] == ["0.0", "30.0"]


def test_sweep_with_range(tmp_path):
    out = tmp_path / "r.csv"
    rc = main(["sweep", "--var", "d_alpha_beta", "--from", "100", "--to", "300",
               "--step", "100", "--schemes", "gpm-oma", "--reps", "1",
               "--seed", "1", "--lambda-grid", "0.05", "--out", str(out)])
    assert rc == 0
    _, rows = read_sweep_csv(out)
    assert [float(r["value"]) for r in rows] == [100.0, 200.0, 300.0]


def test_sweep_honors_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"p_center_dbm": 13.0}))
    out = tmp_path / "c.csv"
    rc = main(["sweep", "--var", "p_beta", "--values", "10", "--schemes", "gpm-oma",
               "--reps", "1", "--seed", "1", "--lambda-grid", "0.05",
               "--config", str(cfg), "--out", str(out)])
    assert rc == 0
    meta, _ = read_sweep_csv(out)
    assert meta["params.p_center_dbm"] == "13.0"


def test_malformed_config_exits_one(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text("{not json")
    assert main(["pair-demo", "--out", str(tmp_path / "x.csv"),
                 "--config", str(cfg)]) == 1


def test_validate_quick(capsys):
    assert main(["validate", "--grid", "quick"]) == 0
    out = capsys.readouterr().out
    assert "RESULT: PASS" in out


def test_plot_from_sweep(tmp_path, capsys):
    csv_path = tmp_path / "s.csv"
    assert main(["sweep", "--var", "p_beta", "--values", "0,30",
                 "--schemes", "gpm-noma", "--reps", "1", "--seed", "1",
                 "--lambda-grid", "0.05", "--out", str(csv_path)]) == 0
    svg = tmp_path / "f.svg"
    assert main(["plot", "--kind", "fig3", "--in", str(csv_path), "--out", str(svg)]) == 0
    assert svg.exists()
    # data failures exit 2
    assert main(["plot", "--kind", "fig99", "--in", str(csv_path),
                 "--out", str(tmp_path / "g.svg")]) == 2
    assert main(["plot", "--kind", "fig3", "--in", str(tmp_path / "missing.csv"),
                 "--out", str(tmp_path / "h.svg")]) == 2


def test_pair_demo(tmp_path, capsys):
    out = tmp_path / "scene.csv"
    assert main(["pair-demo", "--seed", "0", "--out", str(out)]) == 0
    assert out.exists()
    assert "pairs" in capsys.readouterr().out


def test_optimize_one(capsys):
    assert main(["optimize-one", "--seed", "0", "--p-beta", "20"]) == 0
    out = capsys.readouterr().out
    assert "schedule: lambda=" in out
    assert "outage: alpha=" in out
    assert main(["optimize-one", "--seed", "0", "--scheme", "gpm-oma"]) == 0
    out = capsys.readouterr().out
    assert "outage:" not in out
    assert main(["optimize-one", "--scheme", "gpm-nonsense"]) == 1


def test_bench_runs(capsys):
    assert main(["bench"]) == 0
    out = capsys.readouterr().out
    assert "active lane:" in out
    assert "outage_counts" in out


def test_console_script_installed():
    exe = shutil.which("sim")
    assert exe, "console entry point 'sim' is not on PATH"
    proc = subprocess.run([exe, "--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("sim ")
