"""Experiment configuration: dataclass, validation, and the line-oriented
dotted-key file format (``section.key = value``).

Unknown keys are rejected so that typos fail loudly. Values are parsed as
Python literals; bare words become strings.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field, fields

from .errors import ConfigError


@dataclass
class ExperimentConfig:
    # --- physical network -------------------------------------------------
    env_n_mec: int = 4
    env_n_nodes: int = 10
    env_mec_aerial_fraction: float = 0.5
    env_arena: float = 100.0          # side of the square arena
    env_node_height: float = 0.0
    env_mec_ground_height: float = 10.0
    env_mec_alt_range: tuple = (40.0, 80.0)
    env_speed_max: float = 1.0
    env_horizon: int = 200            # steps per episode
    env_step_duration: float = 5.0    # time units per step (task release)

    # channel
    env_f_c: float = 2e9
    env_c: float = 3e8
    env_eta_los: float = 1.0
    env_eta_nlos: float = 20.0
    env_alpha: float = 9.61
    env_beta: float = 0.16
    env_lambda_o: float = 0.3         # obstruction density
    env_r_o: float = 1.0              # mean obstruction radius
    env_h_mean: float = 15.0          # obstruction height CCDF scale
    env_k_factor: float = 3.0         # Rician K
    env_bandwidth: float = 10.0
    env_noise: float = 1e-10
    env_rate_floor: float = 1e-6
    env_quadrature_panels: int = 100

    # tasks
    env_data_range: tuple = (10.0, 80.0)
    env_ck_range: tuple = (1000.0, 5000.0)
    env_th_range: tuple = (1.0, 10.0)
    env_cat_band_edges: tuple = (4.0,)   # th_max <= edge -> higher priority
    env_cdata_fraction: float = 0.1
    env_data_unit: float = 0.025         # normalized data per scaled unit (sweeps)

    # nodes and MECs
    env_f_n_range: tuple = (2.0, 4.0)
    env_node_energy: float = 1e6
    env_energy_drain: float = 1.0     # budget units drained per energy unit spent
    env_node_p_tx: float = 1.0
    env_node_ue_tr: float = 1.0
    env_mec_cr_fixed: float = 6.0
    env_mec_cr_range: tuple = (0.5, 1.5)
    env_mec_compute_scale: float = 1.0   # shrinks MEC compute for stress sweeps
    env_mec_p_m: float = 1.0
    env_mec_ue_m: float = 1.0
    env_mec_ue_tr_m: float = 1.0

    # cost weights, link delays, constraints
    env_kappa: float = 0.5
    env_uplink_scale: float = 1.0
    env_downlink_scale: float = 1.0
    env_ho_energy_uses_power: bool = False
    env_delay_tr: float = 1.0
    env_delay_process: float = 0.01
    env_ue_threshold: float = 50.0
    env_t_max_task: float = 60.0
    env_p_max_mec: float = 5.0
    env_p_max_node: float = 2.0

    # reward
    env_c_const: float = -1.0         # negative -> calibrate from FLC percentile
    env_c_const_percentile: float = 95.0
    env_penalty: float = 0.0          # 0 -> symmetric auto (-c_const); else explicit negative
    env_global_cost_in_state: bool = False

    # action discretization
    env_subband_count: int = 2
    env_tr_grid: tuple = (0.2,)
    env_rho_grid: tuple = (0.25, 0.5, 0.75, 1.0)
    env_p_grid: tuple = (0.5, 1.0)
    env_ue_tr_grid: tuple = (1.0,)

    # --- learners ---------------------------------------------------------
    ddql_zeta: float = 0.9
    ddql_psi: float = 0.0001          # learning rate
    ddql_eta: int = 500               # training episodes
    ddql_batch: int = 64
    ddql_hidden: tuple = (64, 32)
    ddql_eps_start: float = 1.0
    ddql_eps_end: float = 0.001
    ddql_eps_frac: float = 0.8        # fraction of eta at which the floor is hit
    ddql_target_sync: int = 200       # optimizer steps between target syncs
    ddql_memory: int = 20000
    ddql_train_every: int = 4         # env steps between optimizer steps
    ddql_lr_end_frac: float = 1.0     # lr anneals to psi * this by training end
    ddql_unc_scale: float = 1.0
    ddql_use_prev_net_sum: bool = True
    ddql_tvf_verbatim: bool = False

    ql_psi: float = 0.1
    ql_state_buckets: tuple = (6, 6, 4)   # data, gain, th_max buckets

    # baselines
    base_dedicated_rho: float = 0.25
    base_offload_prob: float = 0.5

    master_seed: int = 0

    def validate(self):
        def require(cond, msg):
            if not cond:
                raise ConfigError(msg)

        require(self.env_n_mec >= 1, "env.n_mec: need at least one MEC")
        require(self.env_n_nodes >= 1, "env.n_nodes: need at least one node")
        require(0.0 <= self.env_mec_aerial_fraction <= 1.0,
                "env.mec_aerial_fraction: outside [0,1]")
        require(self.env_horizon >= 1, "env.horizon: must be positive")
        require(self.env_f_c > 0 and self.env_c > 0, "env.f_c/env.c: must be positive")
        require(self.env_eta_los <= self.env_eta_nlos,
                "env.eta_los: must not exceed env.eta_nlos")
        require(0 < self.ddql_zeta < 1, "ddql.zeta: must lie in (0,1)")
        require(self.ddql_psi > 0, "ddql.psi: must be positive")
        require(0 < self.ddql_lr_end_frac <= 1,
                "ddql.lr_end_frac: must lie in (0,1]")
        require(self.ddql_eta >= 1, "ddql.eta: must be positive")
        require(self.ddql_batch >= 1, "ddql.batch: must be positive")
        require(0 <= self.ddql_eps_end <= self.ddql_eps_start <= 1,
                "ddql.eps: schedule must stay within [0,1] and be non-increasing")
        require(self.ql_psi > 0, "ql.psi: must be positive")
        require(all(r > 0 for r in self.env_rho_grid)
                and all(r <= 1 for r in self.env_rho_grid),
                "env.rho_grid: entries must lie in (0,1]")
        require(all(p >= 0 for p in self.env_p_grid)
                and all(p <= self.env_p_max_node for p in self.env_p_grid),
                "env.p_grid: entries must lie in [0, env.p_max_node]")
        for name in ("env_rho_grid", "env_p_grid", "env_tr_grid", "env_ue_tr_grid"):
            grid = getattr(self, name)
            require(all(a < b for a, b in zip(grid, grid[1:])),
                    f"{name.replace('_', '.', 1)}: grid must be strictly increasing")
        require(self.env_subband_count >= 1, "env.subband_count: must be positive")
        require(0.0 <= self.base_offload_prob <= 1.0,
                "base.offload_prob: outside [0,1]")
        require(0.0 < self.base_dedicated_rho <= 1.0,
                "base.dedicated_rho: outside (0,1]")
        require(self.env_ue_threshold > 0 and self.env_t_max_task > 0,
                "constraint caps must be positive")
        require(self.env_penalty <= 0, "env.penalty: must be non-positive")
        lo, hi = self.env_data_range
        require(0 < lo <= hi, "env.data_range: need 0 < lo <= hi")
        return self


_FIELD_NAMES = {f.name for f in fields(ExperimentConfig)}


def _parse_value(text: str):
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        if text.lower() in ("true", "false"):
            return text.lower() == "true"
        return text


def parse_config_text(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    cfg = base if base is not None else ExperimentConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        attr = key.strip().replace(".", "_")
        if attr not in _FIELD_NAMES:
            raise ConfigError(f"line {lineno}: unknown key {key.strip()!r}")
        parsed = _parse_value(value.strip())
        current = getattr(cfg, attr)
        if isinstance(current, tuple) and not isinstance(parsed, tuple):
            parsed = (parsed,) if not isinstance(parsed, list) else tuple(parsed)
        if isinstance(parsed, list):
            parsed = tuple(parsed)
        if isinstance(current, bool):
            if not isinstance(parsed, bool):
                raise ConfigError(f"line {lineno}: {key.strip()} expects true/false")
        elif isinstance(current, int) and not isinstance(parsed, int):
            raise ConfigError(f"line {lineno}: {key.strip()} expects an integer")
        elif isinstance(current, float) and not isinstance(parsed, (int, float)):
            raise ConfigError(f"line {lineno}: {key.strip()} expects a number")
        setattr(cfg, attr, parsed)
    cfg.validate()
    return cfg


def load_config(path) -> ExperimentConfig:
    """Read and validate a dotted-key config file."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return parse_config_text(text)
