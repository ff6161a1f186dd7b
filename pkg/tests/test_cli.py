import json
import os
import subprocess
import sys

import numpy as np
import pytest

from canardkit import cli, models
from canardkit.numerics import IntegratorConfig, integrate


def run(argv, tmp_path):
    return cli.main(list(argv) + ["--out", str(tmp_path)])


def read_csv(path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    return header, np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def test_simulate_fig1_family_member(tmp_path):
    assert run(["simulate", "--preset", "fig1", "--i", "3"], tmp_path) == 0
    csvs = [f for f in os.listdir(tmp_path) if f.endswith(".csv")]
    assert len(csvs) == 1
    header, data = read_csv(tmp_path / csvs[0])
    assert header == ["t", "x", "y"]
    assert data[0, 1] == pytest.approx(0.15, abs=1e-15) and data[0, 2] == 1.0
    man = json.loads((tmp_path / csvs[0].replace(".csv", ".manifest.json")).read_text())
    assert man["system"] == "transcritical1d" and man["params"]["epsilon"] == 0.1
    assert man["initial_state"][0] == pytest.approx(0.15)


def test_simulate_rows_match_recorded_samples(tmp_path):
    argv = ["simulate", "--system", "dtcbb", "--a", "5", "--b", "2", "--epsilon", "0.5",
            "--x0", "1e-3", "--y0", "0", "--step", "1e-3", "--max-time", "2", "--record-stride", "7",
            "--name", "k"]
    assert run(argv, tmp_path) == 0
    header, data = read_csv(tmp_path / "k.csv")
    assert header == ["t", "x", "y"]
    sys_ = models.dtcbb(models.DtcbbParams(0.5, 5.0, 2.0))
    traj, _ = integrate(sys_, [1e-3, 0.0], IntegratorConfig(step=1e-3, max_time=2.0, record_stride=7))
    assert data.shape == (len(traj.t), 3)
    np.testing.assert_array_equal(data[:, 1:], traj.states)


def test_manifest_replay_is_byte_identical(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    argv = ["simulate", "--preset", "fig3", "--max-time", "5", "--name", "r"]
    assert run(argv, first) == 0
    assert cli.main(["--manifest", str(first / "r.manifest.json"), "--out", str(second)]) == 0
    for f in os.listdir(first):
        if f.endswith(".csv"):
            assert (first / f).read_bytes() == (second / f).read_bytes()
    m1 = json.loads((first / "r.manifest.json").read_text())
    m2 = json.loads((second / "r.manifest.json").read_text())
    m1.pop("wall_time"), m2.pop("wall_time")
    assert m1 == m2


def test_manifest_replay_of_analysis(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    argv = ["analyze", "transition", "--system", "dtcbnl", "--b", "2", "--delta", "0.5", "--eta", "0.1",
            "--C", "0.1", "--k", "0.5", "--epsilon", "0.1", "--step", "1e-4", "--name", "t"]
    assert run(argv, first) == 0
    assert cli.main(["--manifest", str(first / "t.manifest.json"), "--out", str(second)]) == 0
    assert (first / "t.transition.csv").read_bytes() == (second / "t.transition.csv").read_bytes()


def test_output_directory_from_environment(tmp_path, monkeypatch):
    target = tmp_path / "env-out"
    monkeypatch.setenv(cli.OUTPUT_ENV, str(target))
    assert cli.main(["simulate", "--system", "dtc", "--max-time", "1", "--name", "e"]) == 0
    assert (target / "e.csv").exists()


def test_config_file_layers_under_flags(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# dtc run\nsystem = dtc\nepsilon = 0.2\ninit.x = 0.5\nstep = 1e-3\nmax_time = 1\n")
    assert run(["simulate", "--config", str(cfg), "--epsilon", "0.3", "--name", "c"], tmp_path) == 0
    man = json.loads((tmp_path / "c.manifest.json").read_text())
    assert man["params"]["epsilon"] == 0.3
    assert man["initial_state"] == [0.5, 0.0]
    jcfg = tmp_path / "run.json"
    jcfg.write_text(json.dumps({"system": "dtc", "epsilon": 0.2, "max_time": 1, "step": 1e-3}))
    assert run(["simulate", "--config", str(jcfg), "--name", "j"], tmp_path) == 0
    assert json.loads((tmp_path / "j.manifest.json").read_text())["params"]["epsilon"] == 0.2


def test_analyze_bifurcations_report(tmp_path):
    assert run(["analyze", "bifurcations", "--system", "tritrophic", "--preset", "table23",
                "--name", "b"], tmp_path) == 0
    files = [f for f in os.listdir(tmp_path) if f.endswith(".json") and "manifest" not in f]
    doc = json.loads((tmp_path / files[0]).read_text())
    assert doc["z_T"] == pytest.approx(1 / 700, abs=1e-12)
    assert doc["z_T"] < doc["z_H"] < doc["z_P"] and doc["ordered"]


def test_analyze_critical_set_csv(tmp_path):
    assert run(["analyze", "critical-set", "--system", "dtcbb", "--resolution", "21", "--name", "cs"],
               tmp_path) == 0
    files = [f for f in os.listdir(tmp_path) if f.endswith(".csv")]
    with open(tmp_path / files[0]) as fh:
        assert fh.readline().strip() == "branch,x,y,z,classification"


def test_perturb_sweep_with_threads(tmp_path, capsys):
    assert run(["perturb", "--alphas", "0", "1e-2", "--max-time", "12", "--jobs", "2"], tmp_path) == 0
    out = capsys.readouterr().out
    assert "alpha=0: no strip exit" in out
    assert "alpha=0.01: exit at t=" in out


def test_exit_codes(tmp_path):
    assert run(["simulate", "--system", "dtc", "--epsilon", "-1"], tmp_path) == cli.EXIT_CONFIG
    assert run(["simulate", "--system", "dtc", "--set", "bogus=1"], tmp_path) == cli.EXIT_CONFIG
    assert run(["simulate", "--system", "dtc", "--step", "0"], tmp_path) == cli.EXIT_CONFIG
    # x' = x^2 - xy from (0.5, 0) blows up near t = 2
    assert run(["simulate", "--system", "transcritical1d", "--x0", "0.5", "--y0", "0", "--max-time", "5",
                "--name", "div"], tmp_path) == cli.EXIT_DIVERGED
    # the partial trajectory up to divergence is still written
    assert (tmp_path / "div.csv").exists()
    assert run(["analyze", "bifurcations", "--system", "tritrophic", "--d1", "0.19"],
               tmp_path) == cli.EXIT_ASSUMPTION
    with pytest.raises(SystemExit) as info:
        cli.main(["simulate", "--system", "vanderpol"])
    assert info.value.code == cli.EXIT_CONFIG


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "canardkit", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "canardkit" in out.stdout
