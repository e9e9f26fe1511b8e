"""Experiment execution: policy training/rollout loops, reward-offset
calibration, per-episode metrics and CSV emission.

All randomness flows from the run seed through named substreams; identical
(config, seed) pairs produce byte-identical metrics files.
"""

from __future__ import annotations

import csv
import json
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import agents as ag
from . import nn
from .baselines import STATIC_POLICIES
from .config import ExperimentConfig
from .env import OffloadEnv, cumulative_reward
from .errors import ConfigError

LEARNER_POLICIES = ("ql", "dql", "ddql")

METRICS_HEADER = ("episode", "loss", "cum_reward", "sum_cost",
                  "violations", "handovers", "hash_rejects")
SUMMARY_HEADER = ("policy", "seed", "episodes", "mean_cost_all",
                  "mean_cost_final", "mean_reward_final", "c_const",
                  "wall_clock_s")


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _policy_rngs(seed: int):
    return {
        "policy": np.random.default_rng(np.random.SeedSequence([seed, 101])),
        "init": np.random.default_rng(np.random.SeedSequence([seed, 102])),
        "train": np.random.default_rng(np.random.SeedSequence([seed, 103])),
    }


def calibrate_c_const(cfg: ExperimentConfig, seed: int,
                      episodes: int = 2) -> float:
    """Reward offset: the configured percentile of per-agent step costs
    under the full-local baseline."""
    env = OffloadEnv(cfg, seed + 900001)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 900002]))
    values = []
    for _ in range(episodes):
        env.reset()
        for _ in range(cfg.env_horizon):
            actions = STATIC_POLICIES["flc"](env, rng)
            breakdowns, _, _ = env.evaluate_joint(actions)
            values.extend(bd.v for bd in breakdowns)
            _, stats = env.step(actions)
            del stats
    return float(np.percentile(values, cfg.env_c_const_percentile))


@dataclass
class RunResult:
    policy: str
    seed: int
    episodes: int
    rows: list = field(default_factory=list)
    mean_cost_all: float = 0.0
    mean_cost_final: float = 0.0
    mean_reward_final: float = 0.0
    c_const: float = 0.0
    wall_clock_s: float = 0.0
    agents: list | None = None
    env: OffloadEnv | None = None


def _final_window(rows, frac=0.1):
    k = max(int(len(rows) * frac), 1)
    return rows[-k:]


def _anneal_learning_rate(cfg: ExperimentConfig, learners, episode: int,
                          n_episodes: int):
    """Exponential learning-rate decay from psi to psi * lr_end_frac,
    applied to the deep learners' optimizers each episode."""
    if cfg.ddql_lr_end_frac >= 1.0 or n_episodes <= 1:
        return
    frac = episode / (n_episodes - 1)
    lr = cfg.ddql_psi * cfg.ddql_lr_end_frac ** frac
    for agent in learners:
        for attr in ("adam", "adam_theta", "adam_phi"):
            opt = getattr(agent, attr, None)
            if opt is not None:
                opt.lr = lr


def greedy_joint_action(env: OffloadEnv, learners, rng):
    states = [env._state_vector(i) for i in range(env.n_nodes)]
    return [env.actions.to_vector(learners[i].act(states[i], 0.0, rng))
            for i in range(env.n_nodes)]


def build_learners(cfg: ExperimentConfig, policy: str, env: OffloadEnv,
                   init_rng: np.random.Generator):
    """Instantiate per-node learners for one of ql/dql/ddql."""
    n_actions = env.actions.size
    if policy == "ql":
        return [ag.TabularAgent(n_actions, cfg.ql_state_buckets,
                                cfg.ql_psi, cfg.ddql_zeta)
                for _ in range(env.n_nodes)]
    from .env import N_STATE_FEATURES
    spec = nn.MlpSpec((N_STATE_FEATURES, *cfg.ddql_hidden, n_actions))
    h = ag.HyperParams(
        psi=cfg.ddql_psi, zeta=cfg.ddql_zeta, batch_size=cfg.ddql_batch,
        target_sync_period=cfg.ddql_target_sync,
        memory_capacity=cfg.ddql_memory, unc_scale=cfg.ddql_unc_scale,
        use_prev_net_sum=cfg.ddql_use_prev_net_sum,
        tvf_verbatim=cfg.ddql_tvf_verbatim)
    if policy == "dql":
        shared = ag.ReplayMemory(cfg.ddql_memory)
        return [ag.DqlAgent(spec, h, init_rng, memory=shared)
                for _ in range(env.n_nodes)]
    if policy == "ddql":
        return [ag.DdqlAgent(spec, h, init_rng) for _ in range(env.n_nodes)]
    raise ConfigError(f"unknown learner policy {policy!r}")


def run_experiment(cfg: ExperimentConfig, policy: str, seed: int,
                   out_dir=None, episodes: int | None = None,
                   c_const: float | None = None) -> RunResult:
    """Execute one (policy, seed) run and return per-episode metrics.

    Static policies roll out unchanged; learners follow their training
    loop with epsilon decaying per episode. Metrics are optionally
    streamed to ``<out_dir>/metrics.csv``.
    """
    cfg.validate()
    if policy not in STATIC_POLICIES and policy not in LEARNER_POLICIES:
        raise ConfigError(f"unknown policy {policy!r}")
    t0 = time.monotonic()
    n_episodes = episodes if episodes is not None else cfg.ddql_eta

    env = OffloadEnv(cfg, seed)
    if c_const is None and cfg.env_c_const < 0:
        c_const = calibrate_c_const(cfg, seed)
    if c_const is not None:
        env.set_reward_offset(c_const)
    rngs = _policy_rngs(seed)

    learners = None
    if policy in LEARNER_POLICIES:
        learners = build_learners(cfg, policy, env, rngs["init"])

    result = RunResult(policy=policy, seed=seed, episodes=n_episodes,
                       c_const=env.c_const, agents=learners, env=env)

    writer = None
    fh = None
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        fh = open(os.path.join(out_dir, "metrics.csv"), "w", newline="")
        writer = csv.writer(fh)
        writer.writerow(METRICS_HEADER)

    try:
        for ep in range(n_episodes):
            eps = ag.epsilon_schedule(ep, n_episodes, cfg.ddql_eps_start,
                                      cfg.ddql_eps_end, cfg.ddql_eps_frac)
            env.set_exploration(eps if learners is not None else 0.0)
            if learners is not None and policy in ("dql", "ddql"):
                _anneal_learning_rate(cfg, learners, ep, n_episodes)
            states = env.reset()
            losses = []
            step_rewards = []
            sum_cost = violations = handovers = 0.0
            done = False
            t = 0
            while not done and t < cfg.env_horizon:
                if learners is None:
                    actions = STATIC_POLICIES[policy](env, rngs["policy"])
                else:
                    actions = [env.actions.to_vector(
                        learners[i].act(states[i], eps, rngs["policy"]))
                        for i in range(env.n_nodes)]
                transitions, stats = env.step(actions)
                states = [tr.s_next for tr in transitions]
                sum_cost += stats.sum_cost
                violations += stats.violations
                handovers += stats.handovers
                step_rewards.append(stats.reward_sum)
                done = transitions[0].comp
                if learners is not None:
                    if policy == "ql":
                        for i, tr in enumerate(transitions):
                            learners[i].observe(tr)
                    else:
                        for i, tr in enumerate(transitions):
                            learners[i].observe(tr)
                        if t % cfg.ddql_train_every == 0:
                            for lr_agent in learners:
                                loss = lr_agent.train_step(rngs["train"])
                                if loss is not None:
                                    losses.append(loss)
                t += 1

            hash_rejects = 0
            if policy == "ddql":
                hash_rejects = ag.aggregate_and_distribute(learners, ep)

            row = {
                "episode": ep,
                "loss": float(np.mean(losses)) if losses else 0.0,
                "cum_reward": cumulative_reward(step_rewards, cfg.ddql_zeta),
                "sum_cost": float(sum_cost),
                "violations": int(violations),
                "handovers": int(handovers),
                "hash_rejects": hash_rejects,
            }
            result.rows.append(row)
            if writer is not None:
                writer.writerow([_fmt(row[k]) for k in METRICS_HEADER])
    finally:
        if fh is not None:
            fh.close()

    final = _final_window(result.rows)
    result.mean_cost_all = float(np.mean([r["sum_cost"] for r in result.rows]))
    result.mean_cost_final = float(np.mean([r["sum_cost"] for r in final]))
    result.mean_reward_final = float(np.mean([r["cum_reward"] for r in final]))
    result.wall_clock_s = time.monotonic() - t0

    if out_dir is not None:
        _write_summary(out_dir, result)
        if policy in ("dql", "ddql"):
            _save_checkpoints(out_dir, policy, learners, result, cfg)
    return result


def _write_summary(out_dir, result: RunResult):
    path = os.path.join(out_dir, "summary.csv")
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(SUMMARY_HEADER)
        w.writerow([result.policy, result.seed, result.episodes,
                    _fmt(result.mean_cost_all), _fmt(result.mean_cost_final),
                    _fmt(result.mean_reward_final), _fmt(result.c_const),
                    _fmt(result.wall_clock_s)])


def _save_checkpoints(out_dir, policy, learners, result: RunResult,
                      cfg: ExperimentConfig):
    meta = {"policy": policy, "episodes": result.episodes,
            "final_epsilon": ag.epsilon_schedule(
                result.episodes - 1, result.episodes, cfg.ddql_eps_start,
                cfg.ddql_eps_end, cfg.ddql_eps_frac),
            "memory_sizes": [len(a.memory) for a in learners]}
    for i, a in enumerate(learners):
        if policy == "dql":
            nn.save_checkpoint(os.path.join(out_dir, f"agent{i:02d}_q.ckpt"),
                               a.spec, a.params, a.adam)
        else:
            nn.save_checkpoint(os.path.join(out_dir, f"agent{i:02d}_mean.ckpt"),
                               a.spec, a.theta, a.adam_theta)
            nn.save_checkpoint(os.path.join(out_dir, f"agent{i:02d}_unc.ckpt"),
                               a.spec, a.phi, a.adam_phi)
    with open(os.path.join(out_dir, "checkpoint_meta.json"), "w") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
