"""Parameter sweeps and policy comparison tables."""

from __future__ import annotations

import csv
import os
from dataclasses import replace as dc_replace
from copy import deepcopy

import numpy as np

from .config import ExperimentConfig
from .runner import LEARNER_POLICIES, RunResult, run_experiment, _fmt


def _with_data_size(cfg: ExperimentConfig, size: float) -> ExperimentConfig:
    cfg2 = deepcopy(cfg)
    u = cfg.env_data_unit
    cfg2.env_data_range = (0.8 * size * u, 1.2 * size * u)
    return cfg2.validate()


def _with_mec_count(cfg: ExperimentConfig, count: int) -> ExperimentConfig:
    cfg2 = deepcopy(cfg)
    cfg2.env_n_mec = count
    return cfg2.validate()


def _mean_final_cost(cfg, policy, seeds, episodes) -> float:
    vals = []
    for s in range(seeds):
        ep = episodes if policy in LEARNER_POLICIES else max(episodes // 4, 5)
        r = run_experiment(cfg, policy, cfg.master_seed + s, episodes=ep)
        vals.append(r.mean_cost_final)
    return float(np.mean(vals))


def sweep_data_size(cfg: ExperimentConfig, policies, grid, seeds: int = 1,
                    episodes: int = 60, out_dir=None):
    """Mean final sum cost per (policy, data size); long-form rows plus a
    per-policy monotonicity flag (non-decreasing along the grid within 2%
    of the policy's cost range per step)."""
    rows = []
    for size in grid:
        cfg_s = _with_data_size(cfg, size)
        for policy in policies:
            rows.append({"policy": policy, "data_size": size,
                         "mean_cost": _mean_final_cost(cfg_s, policy, seeds, episodes)})
    monotone = {}
    for policy in policies:
        series = [r["mean_cost"] for r in rows if r["policy"] == policy]
        span = max(series) - min(series)
        tol = 0.02 * span
        monotone[policy] = all(b >= a - tol for a, b in zip(series, series[1:]))
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "sweep_data.csv"), "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(("policy", "data_size", "mean_cost", "monotone"))
            for r in rows:
                w.writerow((r["policy"], _fmt(float(r["data_size"])),
                            _fmt(r["mean_cost"]), monotone[r["policy"]]))
    return rows, monotone


def sweep_mec_count(cfg: ExperimentConfig, policies, grid, seeds: int = 1,
                    episodes: int = 60, out_dir=None):
    """Mean final sum cost per (policy, MEC count); reports the first count
    at which full-offload overtakes full-local, when both are present."""
    rows = []
    for count in grid:
        cfg_m = _with_mec_count(cfg, count)
        for policy in policies:
            rows.append({"policy": policy, "n_mec": count,
                         "mean_cost": _mean_final_cost(cfg_m, policy, seeds, episodes)})
    crossover = None
    if "foc" in policies and "flc" in policies:
        for count in grid:
            foc = next(r["mean_cost"] for r in rows
                       if r["policy"] == "foc" and r["n_mec"] == count)
            flc = next(r["mean_cost"] for r in rows
                       if r["policy"] == "flc" and r["n_mec"] == count)
            if foc > flc:
                crossover = count
                break
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "sweep_mec.csv"), "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(("policy", "n_mec", "mean_cost", "foc_flc_crossover"))
            for r in rows:
                w.writerow((r["policy"], r["n_mec"], _fmt(r["mean_cost"]),
                            crossover if crossover is not None else ""))
    return rows, crossover


def compare_policies(cfg: ExperimentConfig, policies, seeds: int = 1,
                     episodes: int | None = None, out_dir=None):
    """Mean final cost per policy and the percent reduction the double-deep
    learner achieves against each of them."""
    means = {}
    for policy in policies:
        vals = []
        for s in range(seeds):
            ep = episodes
            if ep is None:
                ep = cfg.ddql_eta if policy in LEARNER_POLICIES else max(cfg.ddql_eta // 10, 5)
            r = run_experiment(cfg, policy, cfg.master_seed + s, episodes=ep)
            vals.append(r.mean_cost_final)
        means[policy] = float(np.mean(vals))
    rows = []
    ref = means.get("ddql")
    for policy in policies:
        reduction = ""
        if ref is not None and policy != "ddql" and means[policy] > 0:
            reduction = (means[policy] - ref) / means[policy]
        rows.append({"policy": policy, "mean_cost": means[policy],
                     "reduction_vs_ddql": reduction})
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "compare.csv"), "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(("policy", "mean_cost", "reduction_vs_ddql"))
            for r in rows:
                red = r["reduction_vs_ddql"]
                w.writerow((r["policy"], _fmt(r["mean_cost"]),
                            _fmt(red) if isinstance(red, float) else red))
    return rows
