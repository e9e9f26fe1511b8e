import numpy as np
import pytest

from mecoff.config import ExperimentConfig


def small_config(**overrides) -> ExperimentConfig:
    """A fast, fully-specified configuration for unit tests."""
    cfg = ExperimentConfig(
        env_n_mec=2,
        env_n_nodes=3,
        env_arena=50.0,
        env_mec_ground_height=10.0,
        env_mec_alt_range=(20.0, 40.0),
        env_horizon=10,
        env_data_range=(0.5, 2.0),
        env_ck_range=(0.5, 2.0),
        env_noise=1e-11,
        env_node_energy=100.0,
        env_energy_drain=0.001,
        env_delay_tr=0.05,
        env_delay_process=0.5,
        env_mec_p_m=0.2,
        env_mec_cr_range=(2.0, 4.0),
        env_subband_count=2,
        env_rho_grid=(0.5, 1.0),
        env_p_grid=(1.0,),
        env_c_const=10.0,
        ddql_eta=4,
        ddql_batch=8,
        ddql_hidden=(16, 8),
        ddql_memory=500,
        ddql_train_every=2,
        ddql_psi=1e-3,
    )
    for k, v in overrides.items():
        setattr(cfg, k, v)
    cfg.validate()
    return cfg


@pytest.fixture
def cfg():
    return small_config()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
