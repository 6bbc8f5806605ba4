import json

import numpy as np
import pytest

import qghjm.repro
from qghjm.cli import main
from qghjm.export import read_csv
from qghjm.weierstrass import WpConstants, wp_constants


def run(tmp_path, *args, config=None):
    argv = list(args) + ["--out", str(tmp_path)]
    if config is not None:
        tmp_path.mkdir(parents=True, exist_ok=True)
        path = tmp_path / "cfg.toml"
        path.write_text(config)
        argv += ["--config", str(path)]
    return main(argv)


def test_solve_headline(tmp_path):
    assert run(tmp_path, "solve") == 0
    data = json.loads((tmp_path / "solve.json").read_text())
    lo, hi = data["blowup_bracket"]
    assert data["blown_up"] is True and 66.0 <= lo < hi <= 67.0
    traj = read_csv(tmp_path / "trajectory.csv")
    assert set(traj) == {"t", "r", "y"}


def test_solve_sigma0_r_equals_lambda(tmp_path):
    cfg = '[model]\nsigma = 0.0\nbeta = 0.1\ncurve = { kind = "linear", lambda0 = 0.05, slope = 0.01 }\n' \
          '[solve]\nt_end = 10.0\noutput_step = 0.5\n'
    assert run(tmp_path, "solve", config=cfg) == 0
    traj, lam = read_csv(tmp_path / "trajectory.csv"), read_csv(tmp_path / "forward_curve.csv")
    assert np.allclose(traj["r"], lam["lambda"], atol=1e-9)


def test_solve_strong_reversion_with_picard(tmp_path):
    cfg = '[model]\nbeta = 0.5\n[solve]\nt_end = 100.0\npicard = true\npicard_grid = 2001\n'
    assert run(tmp_path, "solve", config=cfg) == 0
    data = json.loads((tmp_path / "solve.json").read_text())
    assert data["blown_up"] is False
    assert abs(data["final_state"]["r"] - data["stationary_limit"]) <= 1e-6
    assert data["picard"]["sup_diff"] <= 1e-6


def test_explosion_outputs(tmp_path):
    assert run(tmp_path, "explosion", "--format", "csv,json,gnuplot") == 0
    data = json.loads((tmp_path / "explosion.json").read_text())
    assert data["report"]["tau"] == pytest.approx(66.51, abs=0.02)
    assert data["profiles"]["0.066"]["vanished"] is True
    prof = read_csv(tmp_path / "v_profiles.csv")
    assert set(np.unique(prof["beta"])) == {0.0625, 0.063246, 0.066}
    assert "plot" in (tmp_path / "v_profiles.gp").read_text()


def test_explosion_supercritical_reported(tmp_path):
    assert run(tmp_path, "explosion", config="[model]\nbeta = 0.1\n[explosion]\nbetas = []\n") == 0
    data = json.loads((tmp_path / "explosion.json").read_text())
    assert data["report"] is None and data["notes"]


@pytest.mark.parametrize("beta,regime", [(0.1, "TwoFixedPoints"), (0.05, "NoFixedPoints"),
                                         (0.06324555320336759, "Degenerate")])
def test_phase(tmp_path, beta, regime):
    assert run(tmp_path, "phase", config=f"[model]\nbeta = {beta!r}\n[phase]\nt_end = 50.0\n") == 0
    data = json.loads((tmp_path / "fixed_points.json").read_text())
    assert data["regime"] == regime
    assert (tmp_path / "basin.csv").exists()


def test_mc_deterministic_and_seed_flag(tmp_path):
    cfg = "[mc]\nn_paths = 200\ndt = 0.02\nt_end = 10.0\n"
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(a, "mc", "--seed", "4", "--eps", "0.3", config=cfg) == 0
    assert run(b, "mc", "--seed", "4", "--eps", "0.3", config=cfg) == 0
    assert (a / "mc_summary.csv").read_bytes() == (b / "mc_summary.csv").read_bytes()
    meta = json.loads((a / "hit_stats.json").read_text())["config"]
    assert meta["seed"] == 4 and meta["noise_scale"] == 0.3


def test_futures(tmp_path):
    assert run(tmp_path, "futures", config="[futures]\nt_max = 70.0\n") == 0
    data = json.loads((tmp_path / "futures.json").read_text())
    assert data["delta=0.25"]["divergence_maturity"] <= 66.6
    assert set(read_csv(tmp_path / "futures_delta_0.25.csv")) >= {"T", "bound", "x_T"}


def test_futures_mc_flag(tmp_path):
    cfg = "[futures]\nt_max = 20.0\nn_paths = 100\ndt = 0.02\n"
    assert run(tmp_path, "futures", "--mc", "--eps", "0.05", config=cfg) == 0
    data = json.loads((tmp_path / "futures.json").read_text())
    assert data["source"] == "mc_mean" and data["noise_scale"] == 0.05


def test_config_error_exit_code(tmp_path):
    assert run(tmp_path, "solve", config="[model]\nsigma = -1.0\n") == 2
    assert run(tmp_path, "solve", "--format", "xml") == 2


def test_numerical_failure_exit_code(tmp_path):
    assert run(tmp_path, "solve", config="[solve]\nmax_steps = 20\n") == 1
    assert (tmp_path / "trajectory_partial.csv").exists()


def test_repro_all_pass(tmp_path):
    assert run(tmp_path, "repro") == 0
    text = (tmp_path / "repro.txt").read_text()
    assert "FAIL" not in text and text.count("PASS") >= 10


def test_repro_fail_propagates(tmp_path, monkeypatch):
    good = wp_constants()
    monkeypatch.setattr(qghjm.repro, "wp_constants", lambda: WpConstants(good.p0, good.omega2 * 1.001))
    assert run(tmp_path, "repro", config="[repro]\nbisect = false\n") == 3
    assert "FAIL" in (tmp_path / "repro.txt").read_text()
