"""Small-instance brute-force verifier: exhaustive enumeration of one-step
joint actions as the ground-truth optimum for policy gap reports."""

from __future__ import annotations

import itertools

import numpy as np

from .baselines import STATIC_POLICIES
from .config import ExperimentConfig
from .env import OffloadEnv
from .errors import ConfigError
from .runner import greedy_joint_action

MAX_AGENTS = 3
MAX_MECS = 2
MAX_JOINT = 200_000


def joint_cost(env: OffloadEnv, joint_action) -> float:
    breakdowns, _, _ = env.evaluate_joint(joint_action)
    return sum(bd.v for bd in breakdowns)


def enumerate_optimum(env: OffloadEnv) -> tuple[float, list]:
    """True one-step minimum of the summed cost over every joint action."""
    n = env.n_nodes
    grid = env.actions.size
    joint_points = grid ** n
    if n > MAX_AGENTS or env.n_mec > MAX_MECS or joint_points > MAX_JOINT:
        raise ConfigError(
            f"instance too large for enumeration: {n} agents, "
            f"{env.n_mec} MECs, {joint_points} joint actions "
            f"(limits {MAX_AGENTS}/{MAX_MECS}/{MAX_JOINT})")
    vectors = [env.actions.to_vector(k) for k in range(grid)]
    best = float("inf")
    best_joint = None
    for combo in itertools.product(vectors, repeat=n):
        c = joint_cost(env, list(combo))
        if c < best:
            best = c
            best_joint = list(combo)
    return best, best_joint


def random_joint_action(env: OffloadEnv, rng: np.random.Generator) -> list:
    return [env.actions.to_vector(int(rng.integers(env.actions.size)))
            for _ in range(env.n_nodes)]


def verify_small_instance(cfg: ExperimentConfig, seed: int,
                          learners: dict | None = None) -> dict:
    """One-step optimality report on a frozen small instance.

    ``learners`` maps policy names to trained per-node agent lists; static
    baselines and a uniform-random policy are always included. Gaps are
    measured against the exhaustive optimum.
    """
    env = OffloadEnv(cfg, seed)
    env.reset()
    optimum, _ = enumerate_optimum(env)

    rng = np.random.default_rng(np.random.SeedSequence([seed, 777]))
    report = {"seed": seed, "optimum": optimum, "policies": {}}
    for name, fn in STATIC_POLICIES.items():
        cost = joint_cost(env, fn(env, rng))
        report["policies"][name] = {"cost": cost, "gap": cost - optimum}
    cost = joint_cost(env, random_joint_action(env, rng))
    report["policies"]["random"] = {"cost": cost, "gap": cost - optimum}
    if learners:
        for name, agents in learners.items():
            cost = joint_cost(env, greedy_joint_action(env, agents, rng))
            report["policies"][name] = {"cost": cost, "gap": cost - optimum}
    return report
