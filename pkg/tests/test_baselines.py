import numpy as np
import pytest

from mecoff import baselines
from mecoff.env import OffloadEnv

from conftest import small_config


def make_env(seed=0, **overrides):
    env = OffloadEnv(small_config(**overrides), seed)
    env.reset()
    return env


def test_flc_keeps_everything_local(rng):
    env = make_env()
    actions = baselines.flc_policy(env, rng)
    assert len(actions) == env.n_nodes
    assert all(a.gamma == 0 for a in actions)
    assert all(a.p == 0 and a.rho == 0 for a in actions)


def test_foc_offloads_everything(rng):
    env = make_env()
    actions = baselines.foc_policy(env, rng)
    assert all(a.gamma == 1 for a in actions)
    # max transmit power level on the grid
    assert all(a.p == len(env.actions.p_grid) - 1 for a in actions)


def test_foc_fair_shares_per_mec(rng):
    # one MEC serves all three nodes, so each requests the level nearest 1/3
    env = make_env(env_n_mec=1, env_rho_grid=(0.25, 0.5, 0.75, 1.0))
    actions = baselines.foc_policy(env, rng)
    want = int(np.argmin(np.abs(np.array([0.25, 0.5, 0.75, 1.0]) - 1 / 3)))
    assert all(a.rho == want for a in actions)


def test_rodrs_uses_fixed_dedicated_grant():
    env = make_env(base_offload_prob=1.0, base_dedicated_rho=0.5,
                   env_rho_grid=(0.25, 0.5, 0.75, 1.0))
    actions = baselines.rodrs_policy(env, np.random.default_rng(3))
    assert all(a.gamma == 1 and a.rho == 1 for a in actions)


def test_rodrs_goes_local_at_zero_probability():
    env = make_env(base_offload_prob=0.0)
    actions = baselines.rodrs_policy(env, np.random.default_rng(3))
    assert all(a.gamma == 0 for a in actions)


def test_rodrs_offload_frequency_tracks_probability():
    env = make_env(base_offload_prob=0.3)
    rng = np.random.default_rng(5)
    flips = [a.gamma for _ in range(400)
             for a in baselines.rodrs_policy(env, rng)]
    assert np.mean(flips) == pytest.approx(0.3, abs=0.05)


def test_rosrs_shares_among_current_offloaders():
    env = make_env(env_n_mec=1, base_offload_prob=1.0,
                   env_rho_grid=(0.25, 0.5, 0.75, 1.0))
    actions = baselines.rosrs_policy(env, np.random.default_rng(0))
    want = int(np.argmin(np.abs(np.array([0.25, 0.5, 0.75, 1.0]) - 1 / 3)))
    assert all(a.gamma == 1 and a.rho == want for a in actions)


def test_rosrs_mixes_local_and_offload():
    env = make_env(base_offload_prob=0.5)
    rng = np.random.default_rng(1)
    gammas = {a.gamma for _ in range(50)
              for a in baselines.rosrs_policy(env, rng)}
    assert gammas == {0, 1}


def test_policies_emit_valid_action_indices(rng):
    env = make_env()
    for name, policy in baselines.STATIC_POLICIES.items():
        for a in policy(env, rng):
            env.actions.to_index(a)  # raises on an out-of-grid action


def test_policy_kinds_cover_all_seven():
    assert baselines.POLICY_KINDS == ("flc", "foc", "rodrs", "rosrs",
                                      "ql", "dql", "ddql")
