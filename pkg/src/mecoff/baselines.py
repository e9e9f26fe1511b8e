"""The four non-learning comparison policies: full-local, full-offload,
and the two random-offloading strategies (dedicated vs shared resources).

Each policy maps the current environment snapshot to one joint action; they
hold no state of their own beyond the rng stream handed in.
"""

from __future__ import annotations

import numpy as np

from .env import ActionVector, OffloadEnv

POLICY_KINDS = ("flc", "foc", "rodrs", "rosrs", "ql", "dql", "ddql")


def _nearest_level(grid, value) -> int:
    return int(np.argmin(np.abs(np.asarray(grid) - value)))


def _offload_action(env: OffloadEnv, i: int, rho_level: int) -> ActionVector:
    spec = env.actions
    return ActionVector(
        subband=i % spec.subband_count, tr=0, gamma=1, rho=rho_level,
        p=len(spec.p_grid) - 1, ue=0)


def _local_action(env: OffloadEnv, i: int) -> ActionVector:
    return ActionVector(subband=i % env.actions.subband_count, tr=0, gamma=0,
                        rho=0, p=0, ue=0)


def flc_policy(env: OffloadEnv, rng: np.random.Generator) -> list[ActionVector]:
    """Full local computation: never offload, minimum transmit power."""
    return [_local_action(env, i) for i in range(env.n_nodes)]


def foc_policy(env: OffloadEnv, rng: np.random.Generator) -> list[ActionVector]:
    """Full offload to the max-gain MEC with fair-shared resources: each of
    the k concurrent offloaders on a MEC requests the grid level nearest
    1/k."""
    counts = np.bincount(env.serving, minlength=env.n_mec)
    actions = []
    for i in range(env.n_nodes):
        k = max(int(counts[env.serving[i]]), 1)
        actions.append(_offload_action(env, i, _nearest_level(env.actions.rho_grid, 1.0 / k)))
    return actions


def rodrs_policy(env: OffloadEnv, rng: np.random.Generator) -> list[ActionVector]:
    """Random offloading with a fixed dedicated resource grant, regardless
    of load."""
    p_off = env.cfg.base_offload_prob
    rho_level = _nearest_level(env.actions.rho_grid, env.cfg.base_dedicated_rho)
    actions = []
    for i in range(env.n_nodes):
        if rng.random() < p_off:
            actions.append(_offload_action(env, i, rho_level))
        else:
            actions.append(_local_action(env, i))
    return actions


def rosrs_policy(env: OffloadEnv, rng: np.random.Generator) -> list[ActionVector]:
    """Random offloading with resources fair-shared among this step's
    concurrent offloaders per MEC."""
    p_off = env.cfg.base_offload_prob
    offloading = [rng.random() < p_off for _ in range(env.n_nodes)]
    counts = np.zeros(env.n_mec, dtype=int)
    for i, off in enumerate(offloading):
        if off:
            counts[env.serving[i]] += 1
    actions = []
    for i, off in enumerate(offloading):
        if off:
            k = max(int(counts[env.serving[i]]), 1)
            actions.append(_offload_action(env, i, _nearest_level(env.actions.rho_grid, 1.0 / k)))
        else:
            actions.append(_local_action(env, i))
    return actions


STATIC_POLICIES = {
    "flc": flc_policy,
    "foc": foc_policy,
    "rodrs": rodrs_policy,
    "rosrs": rosrs_policy,
}
