import csv
import json
import os

import numpy as np
import pytest

from mecoff import cli, runner, sweeps, verify
from mecoff.errors import ConfigError

from conftest import small_config

SMALL_CFG_TEXT = """\
env.n_mec = 2
env.n_nodes = 3
env.horizon = 10
env.data_range = (0.5, 2.0)
env.ck_range = (0.5, 2.0)
env.node_energy = 100.0
env.energy_drain = 0.001
env.delay_tr = 0.05
env.delay_process = 0.5
env.mec_p_m = 0.2
env.mec_cr_range = (2.0, 4.0)
env.subband_count = 2
env.rho_grid = (0.5, 1.0)
env.p_grid = (1.0,)
env.c_const = 10.0
ddql.eta = 4
ddql.batch = 8
ddql.hidden = (16, 8)
ddql.memory = 500
ddql.train_every = 2
ddql.psi = 0.001
"""


def write_cfg(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text(SMALL_CFG_TEXT)
    return str(path)


# --- run_experiment --------------------------------------------------------

def test_static_run_produces_one_row_per_episode(cfg):
    result = runner.run_experiment(cfg, "flc", seed=0, episodes=3)
    assert result.episodes == 3
    assert len(result.rows) == 3
    assert all(r["sum_cost"] > 0 for r in result.rows)
    assert all(r["loss"] == 0.0 for r in result.rows)


def test_unknown_policy_rejected(cfg):
    with pytest.raises(ConfigError):
        runner.run_experiment(cfg, "bogus", seed=0, episodes=1)


def test_metrics_csv_byte_identical_across_reruns(cfg, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    runner.run_experiment(cfg, "ddql", seed=5, out_dir=str(a))
    runner.run_experiment(cfg, "ddql", seed=5, out_dir=str(b))
    assert (a / "metrics.csv").read_bytes() == (b / "metrics.csv").read_bytes()


def test_metrics_csv_header_and_row_count(cfg, tmp_path):
    out = tmp_path / "o"
    runner.run_experiment(cfg, "rosrs", seed=1, out_dir=str(out), episodes=4)
    with open(out / "metrics.csv") as f:
        rows = list(csv.reader(f))
    assert tuple(rows[0]) == runner.METRICS_HEADER
    assert len(rows) == 5
    for row in rows[1:]:
        for cell in row:
            float(cell)  # every metrics cell parses as a plain number


def test_summary_csv_written(cfg, tmp_path):
    out = tmp_path / "o"
    result = runner.run_experiment(cfg, "flc", seed=2, out_dir=str(out),
                                   episodes=3)
    with open(out / "summary.csv") as f:
        rows = list(csv.reader(f))
    assert tuple(rows[0]) == runner.SUMMARY_HEADER
    assert rows[1][0] == "flc"
    assert float(rows[1][4]) == pytest.approx(result.mean_cost_final)


def test_checkpoints_written_for_deep_learners(cfg, tmp_path):
    out = tmp_path / "ddql"
    runner.run_experiment(cfg, "ddql", seed=3, out_dir=str(out))
    names = sorted(os.listdir(out))
    assert "agent00_mean.ckpt" in names and "agent00_unc.ckpt" in names
    assert "agent02_mean.ckpt" in names
    meta = json.loads((out / "checkpoint_meta.json").read_text())
    assert meta["policy"] == "ddql"
    assert len(meta["memory_sizes"]) == 3

    out2 = tmp_path / "dql"
    runner.run_experiment(cfg, "dql", seed=3, out_dir=str(out2))
    assert "agent00_q.ckpt" in os.listdir(out2)


def test_calibrated_offset_used_when_unset():
    cfg = small_config(env_c_const=-1.0)
    result = runner.run_experiment(cfg, "flc", seed=0, episodes=2)
    want = runner.calibrate_c_const(cfg, 0)
    assert result.c_const == pytest.approx(want)
    assert want > 0.0


def test_calibrate_c_const_is_deterministic(cfg):
    assert runner.calibrate_c_const(cfg, 7) == runner.calibrate_c_const(cfg, 7)


def test_learning_rate_anneals_when_configured():
    cfg = small_config(ddql_lr_end_frac=0.1)
    result = runner.run_experiment(cfg, "ddql", seed=0)
    psi = cfg.ddql_psi
    for agent in result.agents:
        assert agent.adam_theta.lr == pytest.approx(psi * 0.1)
        assert agent.adam_phi.lr == pytest.approx(psi * 0.1)


def test_learning_rate_constant_by_default(cfg):
    result = runner.run_experiment(cfg, "ddql", seed=0)
    for agent in result.agents:
        assert agent.adam_theta.lr == cfg.ddql_psi


def test_learner_reports_losses_after_warmup(cfg):
    result = runner.run_experiment(cfg, "dql", seed=0)
    assert any(r["loss"] > 0.0 for r in result.rows)
    assert result.agents is not None and len(result.agents) == 3


# --- sweeps ----------------------------------------------------------------

def test_sweep_data_size_rows_and_csv(cfg, tmp_path):
    out = str(tmp_path)
    rows, monotone = sweeps.sweep_data_size(cfg, ["flc", "foc"], [10.0, 40.0],
                                            episodes=8, out_dir=out)
    assert len(rows) == 4
    assert set(monotone) == {"flc", "foc"}
    with open(os.path.join(out, "sweep_data.csv")) as f:
        got = list(csv.reader(f))
    assert got[0] == ["policy", "data_size", "mean_cost", "monotone"]
    assert len(got) == 5


def test_sweep_data_cost_grows_with_size(cfg):
    rows, monotone = sweeps.sweep_data_size(cfg, ["flc"], [10.0, 80.0],
                                            episodes=8)
    small, large = rows[0]["mean_cost"], rows[1]["mean_cost"]
    assert large > small
    assert monotone["flc"]


def test_sweep_mec_count_csv_and_crossover_type(cfg, tmp_path):
    out = str(tmp_path)
    rows, crossover = sweeps.sweep_mec_count(cfg, ["flc", "foc"], [1, 2],
                                             episodes=8, out_dir=out)
    assert len(rows) == 4
    assert crossover is None or crossover in (1, 2)
    assert os.path.exists(os.path.join(out, "sweep_mec.csv"))


def test_compare_policies_reports_reduction(cfg, tmp_path):
    rows = sweeps.compare_policies(cfg, ["flc", "ddql"], episodes=4,
                                   out_dir=str(tmp_path))
    by_name = {r["policy"]: r for r in rows}
    assert by_name["ddql"]["reduction_vs_ddql"] == ""
    red = by_name["flc"]["reduction_vs_ddql"]
    assert isinstance(red, float)
    want = (by_name["flc"]["mean_cost"] - by_name["ddql"]["mean_cost"]) \
        / by_name["flc"]["mean_cost"]
    assert red == pytest.approx(want)
    assert os.path.exists(os.path.join(str(tmp_path), "compare.csv"))


# --- brute-force verifier --------------------------------------------------

def test_verify_report_structure(cfg):
    report = verify.verify_small_instance(cfg, seed=0)
    assert set(report["policies"]) == {"flc", "foc", "rodrs", "rosrs",
                                       "random"}
    for entry in report["policies"].values():
        assert entry["gap"] >= -1e-9


def test_verify_optimum_lower_bounds_everything(cfg, rng):
    from mecoff.env import OffloadEnv
    env = OffloadEnv(cfg, 1)
    env.reset()
    optimum, best_joint = verify.enumerate_optimum(env)
    for _ in range(50):
        joint = verify.random_joint_action(env, rng)
        assert verify.joint_cost(env, joint) >= optimum - 1e-9
    assert verify.joint_cost(env, best_joint) == pytest.approx(optimum)


def test_verify_refuses_large_instances():
    cfg = small_config(env_n_nodes=8)
    from mecoff.env import OffloadEnv
    env = OffloadEnv(cfg, 0)
    env.reset()
    with pytest.raises(ConfigError, match="too large"):
        verify.enumerate_optimum(env)


def test_verify_includes_trained_learners(cfg):
    result = runner.run_experiment(cfg, "ddql", seed=0)
    report = verify.verify_small_instance(cfg, seed=0,
                                          learners={"ddql": result.agents})
    assert "ddql" in report["policies"]
    assert report["policies"]["ddql"]["gap"] >= -1e-9


# --- command line ----------------------------------------------------------

def test_cli_run_exits_zero(tmp_path, capsys):
    cfg_path = write_cfg(tmp_path)
    code = cli.main(["run", "--config", cfg_path, "--policy", "flc",
                     "--episodes", "2", "--seed", "9",
                     "--out", str(tmp_path / "out")])
    assert code == 0
    assert "policy=flc" in capsys.readouterr().out
    assert (tmp_path / "out" / "metrics.csv").exists()


def test_cli_bad_config_exits_two(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("env.n_mec = 0\n")
    assert cli.main(["run", "--config", str(bad), "--policy", "flc"]) == 2
    assert "config error" in capsys.readouterr().err


def test_cli_missing_config_exits_two(tmp_path, capsys):
    missing = str(tmp_path / "nope.cfg")
    assert cli.main(["run", "--config", missing, "--policy", "flc"]) == 2
    capsys.readouterr()


def test_cli_verify_prints_report(tmp_path, capsys):
    cfg_path = write_cfg(tmp_path)
    assert cli.main(["verify", "--config", cfg_path, "--seed", "4"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert "optimum" in report and "policies" in report


def test_cli_compare_runs(tmp_path, capsys):
    cfg_path = write_cfg(tmp_path)
    code = cli.main(["compare", "--config", cfg_path,
                     "--policies", "flc,rosrs", "--episodes", "2"])
    assert code == 0
    out = capsys.readouterr().out
    assert "flc" in out and "rosrs" in out
