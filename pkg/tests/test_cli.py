import filecmp
import importlib.resources
import json
import os

import numpy as np
import pytest

from tfcauchy.cli import main

BASE_CFG = """\
[domain]
a = 0.0
b = 1.0
n_grid = 63

[symbol]
kind = fractional
nu = 1.0

[problem]
alpha = 0.5
t_horizon = 1.0
phi0 = bump(center=0.5,width=0.3)
method = spectral
time_steps = 16

[mc]
n_paths = 2000
h = 0.004
master_seed = 77

[checks]
run = positivity, decay

[outputs]
directory = out
"""


@pytest.fixture()
def cfg_file(tmp_path):
    p = tmp_path / "exp.cfg"
    p.write_text(BASE_CFG)
    return str(p)


def test_bundled_config_is_packaged():
    path = importlib.resources.files("tfcauchy") / "configs" / "interval_frac_half.cfg"
    assert path.is_file()


def test_special_eval_ml(capsys):
    assert main(["special", "eval", "--ml", "0.5", "1", "-1"]) == 0
    out = capsys.readouterr().out.strip()
    assert float(out) == pytest.approx(0.4275836, abs=1e-6)


def test_special_eval_stable_and_eta(capsys):
    assert main(["special", "eval", "--stable", "0.5", "1.0"]) == 0
    v = float(capsys.readouterr().out)
    assert v == pytest.approx(0.2196956, abs=1e-6)
    assert main(["special", "eval", "--eta", "0.5", "1.0", "1.0"]) == 0
    v = float(capsys.readouterr().out)
    assert v == pytest.approx(0.4393913, abs=1e-6)


def test_eigensystem_prints_classical_spectrum(capsys):
    assert main(["eigensystem", "--modes", "5"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    lams = np.array([float(l.split()[1]) for l in lines])
    want = np.arange(1, 6) ** 2 * np.pi ** 2
    assert (np.abs(lams - want) / want <= 1e-3).all()


def test_run_pipeline_and_exit_code(cfg_file, tmp_path):
    out = str(tmp_path / "r1")
    assert main(["run", cfg_file, "--out", out]) == 0
    names = set(os.listdir(out))
    assert {"solution.csv", "eigensystem.npz", "reports.json",
            "plot_solution.py", "manifest.json"} <= names
    rep = json.loads((tmp_path / "r1" / "reports.json").read_text())
    assert rep["verdict"] == "pass"
    assert set(rep["checks"]) == {"positivity", "decay"}


def test_replay_is_byte_identical(cfg_file, tmp_path):
    out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
    assert main(["--workers", "1", "run", cfg_file, "--out", out1]) == 0
    manifest = os.path.join(out1, "manifest.json")
    assert main(["--workers", "3", "run", "--replay", manifest, "--out", out2]) == 0
    common = sorted(os.listdir(out1))
    assert sorted(os.listdir(out2)) == common
    match, mismatch, errors = filecmp.cmpfiles(out1, out2, common, shallow=False)
    assert not mismatch and not errors


def test_abp_below_threshold_is_config_error(tmp_path):
    cfg = BASE_CFG.replace("run = positivity, decay", "run = abp\nabp_p = 2.0")
    p = tmp_path / "bad.cfg"
    p.write_text(cfg)
    assert main(["run", str(p), "--out", str(tmp_path / "o")]) == 2


def test_unknown_key_rejected(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text(BASE_CFG + "\n[problem2]\nzzz = 1\n")
    assert main(["run", str(p), "--out", str(tmp_path / "o")]) == 2
    p2 = tmp_path / "bad2.cfg"
    p2.write_text(BASE_CFG.replace("alpha = 0.5", "alpha = 0.5\nwhatnot = 3"))
    assert main(["run", str(p2), "--out", str(tmp_path / "o2")]) == 2


def test_solve_subcommand(cfg_file, tmp_path, capsys):
    out = str(tmp_path / "s")
    assert main(["solve", cfg_file, "--out", out]) == 0
    assert os.path.exists(os.path.join(out, "solution.csv"))


def test_simulate_subcommand(tmp_path, capsys):
    cfg = BASE_CFG.replace("method = spectral", "method = monte_carlo") \
                  .replace("operator_mode", "operator_mode") \
                  .replace("time_steps = 16", "time_steps = 16") \
                  .replace("n_paths = 2000", "n_paths = 600")
    p = tmp_path / "mc.cfg"
    p.write_text(cfg)
    out = str(tmp_path / "m")
    assert main(["simulate", str(p), "--out", out]) == 0
    text = (tmp_path / "m" / "mc_estimates.csv").read_text().splitlines()
    assert text[0] == "t,x,estimate,stderr,n_paths,h,seed"
    assert len(text) == 6


def test_method_both_writes_side_by_side(tmp_path):
    cfg = BASE_CFG.replace("method = spectral", "method = both") \
                  .replace("n_paths = 2000", "n_paths = 600")
    p = tmp_path / "both.cfg"
    p.write_text(cfg)
    out = str(tmp_path / "sb")
    assert main(["run", str(p), "--out", out]) == 0
    lines = (tmp_path / "sb" / "side_by_side.csv").read_text().splitlines()
    assert lines[0] == "t,x,spectral,mc_estimate,mc_stderr"
    assert len(lines) == 6


def test_invert_round_trip(tmp_path, capsys):
    cfg = BASE_CFG.replace("phi0 = bump(center=0.5,width=0.3)",
                           "phi0 = zero\nrho1 = sin2()\nrho2 = gauss(center=0.45,sigma=0.1)")
    p = tmp_path / "inv.cfg"
    p.write_text(cfg)
    out = str(tmp_path / "i")
    assert main(["invert", str(p), "--out", out, "--steps", "64"]) == 0
    diag = json.loads((tmp_path / "i" / "inversion_diagnostics.json").read_text())
    assert diag["relative_l2_error"] <= 1e-8
    assert os.path.exists(os.path.join(out, "reconstruction.csv"))


def test_verify_requires_checks(tmp_path):
    cfg = BASE_CFG.replace("run = positivity, decay", "run =")
    p = tmp_path / "nochecks.cfg"
    p.write_text(cfg)
    assert main(["verify", str(p), "--out", str(tmp_path / "v")]) == 2


def test_bundled_golden_run(tmp_path):
    path = importlib.resources.files("tfcauchy") / "configs" / "interval_frac_half.cfg"
    out = str(tmp_path / "g")
    assert main(["run", str(path), "--out", out]) == 0
    rep = json.loads((tmp_path / "g" / "reports.json").read_text())
    assert rep["verdict"] == "pass"
