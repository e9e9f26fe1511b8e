"""Decentralized MDP wrapper around the channel and cost models.

One environment instance owns the world state (positions, fading, tasks,
energies) and must be stepped serially; agents only consume the per-agent
observation vectors it emits.

State feature order (frozen):
    0 gain to serving MEC      1 task data size       2 small-scale fading g
    3-5 serving MEC position   6-8 node position      9 remaining node energy
    10 running cost            11 nominal data rate   12 task category
    13 latency threshold       14 task complexity     15 iteration count
    16 exploration epsilon
Each feature is scaled by a per-feature constant and clipped to [-1, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import costs, geo
from .config import ExperimentConfig
from .errors import ActionError, ConfigError

N_STATE_FEATURES = 17


@dataclass(frozen=True)
class ActionVector:
    """Grid indices of the six action features."""

    subband: int
    tr: int
    gamma: int
    rho: int
    p: int
    ue: int


@dataclass(frozen=True)
class DiscretizationSpec:
    """Per-feature grids of the action space."""

    subband_count: int
    tr_grid: tuple
    rho_grid: tuple
    p_grid: tuple
    ue_tr_grid: tuple

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.subband_count, len(self.tr_grid), 2,
                len(self.rho_grid), len(self.p_grid), len(self.ue_tr_grid))

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def to_vector(self, index: int) -> ActionVector:
        if not 0 <= index < self.size:
            raise ActionError(f"action index {index} outside grid of {self.size}")
        sub, tr, gamma, rho, p, ue = np.unravel_index(index, self.shape)
        return ActionVector(int(sub), int(tr), int(gamma), int(rho), int(p), int(ue))

    def to_index(self, a: ActionVector) -> int:
        self.validate(a)
        return int(np.ravel_multi_index(
            (a.subband, a.tr, a.gamma, a.rho, a.p, a.ue), self.shape))

    def validate(self, a: ActionVector):
        dims = self.shape
        vals = (a.subband, a.tr, a.gamma, a.rho, a.p, a.ue)
        for v, d in zip(vals, dims):
            if not 0 <= v < d:
                raise ActionError(f"action {a} off grid {dims}")


@dataclass(frozen=True)
class Transition:
    s: np.ndarray
    a: int               # flat action index
    r: float
    s_next: np.ndarray
    comp: bool           # episode finished after this transition
    uid: tuple = ()      # (agent, episode, step) identity for dedup on merge


@dataclass
class StepStats:
    sum_cost: float = 0.0
    reward_sum: float = 0.0
    violations: int = 0
    handovers: int = 0
    offloads: int = 0


def classify_task(th_max: float, band_edges: tuple) -> int:
    """Urgency category from the latency threshold; lower category = more
    urgent. Values exactly on a band edge join the higher-priority band."""
    for i, edge in enumerate(band_edges):
        if th_max <= edge:
            return i
    return len(band_edges)


def cumulative_reward(rewards, zeta: float) -> float:
    """Discounted sum of a reward sequence."""
    if not 0 < zeta < 1:
        raise ValueError("zeta must lie in (0,1)")
    return float(sum(zeta ** t * r for t, r in enumerate(rewards)))


class OffloadEnv:
    """The MEC offloading environment for N decentralized agents."""

    def __init__(self, cfg: ExperimentConfig, seed: int):
        cfg.validate()
        if cfg.env_n_nodes < 1 or cfg.env_n_mec < 1:
            raise ConfigError("need at least one node and one MEC")
        self.cfg = cfg
        self.n_nodes = cfg.env_n_nodes
        self.n_mec = cfg.env_n_mec
        ss = np.random.SeedSequence(seed)
        keys = ("placement", "fading", "tasks", "mobility")
        children = ss.spawn(len(keys))
        self.rngs = {k: np.random.default_rng(c) for k, c in zip(keys, children)}

        self.chan = geo.ChannelParams(
            f_c=cfg.env_f_c, c=cfg.env_c,
            eta_los=cfg.env_eta_los, eta_nlos=cfg.env_eta_nlos,
            alpha=cfg.env_alpha, beta=cfg.env_beta)
        self.obstructions = geo.ObstructionModel(
            r_o=cfg.env_r_o, lambda_o=cfg.env_lambda_o,
            g_ccdf=geo.exponential_height_ccdf(cfg.env_h_mean))
        self.link = costs.LinkParams(delay_tr=cfg.env_delay_tr,
                                     delay_process=cfg.env_delay_process)
        self.cost_params = costs.CostParams(
            kappa=cfg.env_kappa, uplink_scale=cfg.env_uplink_scale,
            downlink_scale=cfg.env_downlink_scale,
            ho_energy_uses_power=cfg.env_ho_energy_uses_power)
        self.constraints = costs.ConstraintSet(
            ue_threshold=cfg.env_ue_threshold, t_max_task=cfg.env_t_max_task,
            p_max_m=cfg.env_p_max_mec, p_max_n=cfg.env_p_max_node)
        self.actions = DiscretizationSpec(
            subband_count=cfg.env_subband_count, tr_grid=cfg.env_tr_grid,
            rho_grid=cfg.env_rho_grid, p_grid=cfg.env_p_grid,
            ue_tr_grid=cfg.env_ue_tr_grid)

        # training context mirrored into the state vector
        self.epsilon = 0.0
        self.psi_steps = 0
        self.episode_index = -1
        self.c_const = cfg.env_c_const if cfg.env_c_const >= 0 else 0.0
        self.penalty = cfg.env_penalty if cfg.env_penalty < 0 else -self.c_const

        self._norm = self._build_norms()
        self._fspace_db = 20.0 * math.log10(4.0 * math.pi * cfg.env_f_c / cfg.env_c)

    # --- setup ------------------------------------------------------------

    def _build_norms(self) -> np.ndarray:
        cfg = self.cfg
        arena = cfg.env_arena
        z_hi = max(cfg.env_mec_alt_range[1], cfg.env_mec_ground_height, 1.0)
        n = np.empty(N_STATE_FEATURES)
        n[0] = 2e-4                          # serving gain
        n[1] = cfg.env_data_range[1]
        n[2] = 3.0                           # |N(0,1)| fading
        n[3] = n[4] = arena
        n[5] = z_hi
        n[6] = n[7] = arena
        n[8] = z_hi
        n[9] = max(cfg.env_node_energy, 1e-9)
        n[10] = 50.0 * max(cfg.env_horizon, 1)  # running cost
        n[11] = cfg.env_bandwidth * 10.0     # rate
        n[12] = max(len(cfg.env_cat_band_edges), 1)
        n[13] = cfg.env_th_range[1]
        n[14] = cfg.env_ck_range[1]
        n[15] = max(cfg.ddql_eta * cfg.env_horizon, 1)
        n[16] = 1.0
        return n

    def set_exploration(self, epsilon: float):
        self.epsilon = float(epsilon)

    def set_reward_offset(self, c_const: float):
        """Fix the reward offset (and the symmetric default penalty) after
        calibration."""
        self.c_const = float(c_const)
        if self.cfg.env_penalty >= 0:
            self.penalty = -self.c_const

    def _sample_task(self, origin: geo.Position3D) -> costs.Task:
        cfg = self.cfg
        rng = self.rngs["tasks"]
        data = float(rng.uniform(*cfg.env_data_range))
        ck = float(rng.uniform(*cfg.env_ck_range))
        th = float(rng.uniform(*cfg.env_th_range))
        cat = classify_task(th, cfg.env_cat_band_edges)
        return costs.Task(cat=cat, data=data, ck=ck, th_max=th, origin=origin,
                          cdata=cfg.env_cdata_fraction * data)

    def reset(self) -> list[np.ndarray]:
        cfg = self.cfg
        rng = self.rngs["placement"]
        arena = cfg.env_arena

        n_aerial = int(round(self.n_mec * cfg.env_mec_aerial_fraction))
        self.mecs = []
        # MEC count is fixed; positions follow a homogeneous spatial point
        # process, i.e. uniform given the count
        for j in range(self.n_mec):
            aerial = j < n_aerial
            x, y = rng.uniform(0.0, arena, size=2)
            if aerial:
                z = float(rng.uniform(*cfg.env_mec_alt_range))
                f_max = float(rng.uniform(*cfg.env_mec_cr_range))
            else:
                z = cfg.env_mec_ground_height
                f_max = cfg.env_mec_cr_fixed
            f_max *= cfg.env_mec_compute_scale
            self.mecs.append(costs.MecNode(
                id=j, pos=geo.Position3D(x, y, z),
                kind="aerial" if aerial else "ground",
                f_max=f_max, cr_max=f_max, p_m=cfg.env_mec_p_m,
                ue_m=cfg.env_mec_ue_m, ue_tr_m=cfg.env_mec_ue_tr_m))

        self.nodes = []
        for i in range(self.n_nodes):
            x, y = rng.uniform(0.0, arena, size=2)
            self.nodes.append(costs.UserNode(
                id=i, pos=geo.Position3D(x, y, cfg.env_node_height),
                f_n=float(rng.uniform(*cfg.env_f_n_range)),
                ue=cfg.env_node_energy, p_tx=cfg.env_node_p_tx,
                ue_tr=cfg.env_node_ue_tr))

        node_pos = np.array([n.pos.as_array() for n in self.nodes])
        self._node_motion = geo.MobilityModel(
            node_pos, (arena, arena, max(cfg.env_node_height, 1e-9)),
            cfg.env_speed_max, self.rngs["mobility"])
        aerial_pos = np.array([m.pos.as_array() for m in self.mecs
                               if m.kind == "aerial"]).reshape(-1, 3)
        self._aerial_idx = [m.id for m in self.mecs if m.kind == "aerial"]
        self._mec_motion = geo.MobilityModel(
            aerial_pos, (arena, arena, cfg.env_mec_alt_range[1]),
            cfg.env_speed_max, self.rngs["mobility"])

        self.tasks = [self._sample_task(n.pos) for n in self.nodes]
        self.v_running = np.zeros(self.n_nodes)
        self.t = 0
        self.episode_index += 1
        self._refresh_channel()
        self.prev_serving = self.serving.copy()
        return [self._state_vector(i) for i in range(self.n_nodes)]

    # --- channel snapshot -------------------------------------------------

    def _p_los_matrix(self, dist: np.ndarray) -> np.ndarray:
        """Vectorized LoS probabilities, (M, N). Ground links use the
        closed-form integral of the exponential height CCDF; equivalence
        with the quadrature route is covered by tests."""
        cfg = self.cfg
        mec_z = np.array([m.pos.z for m in self.mecs])[:, None]
        node_z = np.array([n.pos.z for n in self.nodes])[None, :]
        with np.errstate(invalid="ignore", divide="ignore"):
            s = np.clip((mec_z - node_z) / np.maximum(dist, 1e-12), -1.0, 1.0)
        theta = np.degrees(np.arcsin(s))
        p_aer = 1.0 / (1.0 + self.chan.alpha
                       * np.exp(-self.chan.beta * (theta - self.chan.alpha)))
        r_o, lam, hm = cfg.env_r_o, cfg.env_lambda_o, cfg.env_h_mean
        if r_o > 0 and lam > 0:
            upper = dist / (2.0 * r_o)
            integral = hm * (1.0 - np.exp(-upper / hm))
            p_grd = np.exp(-2.0 * r_o * lam * integral)
        else:
            p_grd = np.ones_like(dist)
        aerial = np.array([m.kind == "aerial" for m in self.mecs])[:, None]
        return np.where(aerial, p_aer, p_grd)

    def _refresh_channel(self):
        """Recompute distances, fading, path loss, gains and association."""
        cfg = self.cfg
        mec_pos = np.array([m.pos.as_array() for m in self.mecs])
        node_pos = np.array([n.pos.as_array() for n in self.nodes])
        diff = mec_pos[:, None, :] - node_pos[None, :, :]
        self.dist = np.maximum(np.linalg.norm(diff, axis=2), 1e-9)

        p_los = self._p_los_matrix(self.dist)
        excess = p_los * self.chan.eta_los + (1.0 - p_los) * self.chan.eta_nlos
        self.pl_db = self._fspace_db + 20.0 * np.log10(self.dist) + excess
        pl_lin = 10.0 ** (self.pl_db / 10.0)

        rng = self.rngs["fading"]
        shape = self.dist.shape
        self.fade_g = np.abs(rng.standard_normal(shape))
        k = cfg.env_k_factor
        s = math.sqrt(k / (k + 1.0))
        sigma = math.sqrt(1.0 / (2.0 * (k + 1.0)))
        re = s + sigma * rng.standard_normal(shape)
        im = sigma * rng.standard_normal(shape)
        self.fade_rd = np.hypot(re, im)

        self.gains = np.sqrt(self.fade_g * self.fade_rd / (self.dist * pl_lin))
        self.serving = np.argmax(self.gains, axis=0)

    def _nominal_rate(self, i: int) -> float:
        """Rate to the serving MEC at nominal power on a full sub-band."""
        cfg = self.cfg
        b = cfg.env_bandwidth / cfg.env_subband_count
        h = self.gains[self.serving[i], i]
        snr = self.nodes[i].p_tx * h * h / cfg.env_noise
        return max(b * math.log2(1.0 + snr), cfg.env_rate_floor)

    def _state_vector(self, i: int) -> np.ndarray:
        task = self.tasks[i]
        m = self.mecs[self.serving[i]]
        n = self.nodes[i]
        v = np.array([
            self.gains[self.serving[i], i],
            task.data,
            self.fade_g[self.serving[i], i],
            m.pos.x, m.pos.y, m.pos.z,
            n.pos.x, n.pos.y, n.pos.z,
            n.ue,
            float(np.sum(self.v_running)) if self.cfg.env_global_cost_in_state
            else self.v_running[i],
            self._nominal_rate(i),
            float(task.cat),
            task.th_max,
            task.ck,
            float(self.psi_steps),
            self.epsilon,
        ])
        return np.clip(v / self._norm, -1.0, 1.0)

    # --- dynamics ---------------------------------------------------------

    def evaluate_joint(self, joint_action: list[ActionVector]
                       ) -> tuple[list[costs.CostBreakdown], np.ndarray, StepStats]:
        """Cost breakdowns, rewards and step stats of a joint action against
        the current world state. Pure: does not advance the environment."""
        cfg = self.cfg
        if len(joint_action) != self.n_nodes:
            raise ActionError(
                f"expected {self.n_nodes} actions, got {len(joint_action)}")
        for a in joint_action:
            self.actions.validate(a)

        # requested MEC resources, renormalized so each MEC grants <= 1
        requested = np.zeros(self.n_nodes)
        mec_of = np.full(self.n_nodes, -1)
        for i, a in enumerate(joint_action):
            if a.gamma == 1:
                requested[i] = self.actions.rho_grid[a.rho]
                mec_of[i] = self.serving[i]
        granted = requested.copy()
        for j in range(self.n_mec):
            on_j = mec_of == j
            total = requested[on_j].sum()
            if total > 1.0:
                granted[on_j] = requested[on_j] / total

        # sub-band collision count per (MEC, sub-band)
        occupancy = {}
        for i, a in enumerate(joint_action):
            if a.gamma == 1:
                key = (mec_of[i], a.subband)
                occupancy[key] = occupancy.get(key, 0) + 1

        stats = StepStats()
        rewards = np.empty(self.n_nodes)
        breakdowns = []

        for i, a in enumerate(joint_action):
            node, task = self.nodes[i], self.tasks[i]
            p_tx = self.actions.p_grid[a.p]
            serving = self.serving[i]
            mec = self.mecs[serving]
            if a.gamma == 0:
                bd = costs.local_cost(task, node, self.link, self.cost_params)
            else:
                h = self.gains[serving, i]
                b = cfg.env_bandwidth / cfg.env_subband_count
                rate = geo.data_rate(h, p_tx, cfg.env_noise, b)
                rate /= occupancy[(serving, a.subband)]
                moved = serving != self.prev_serving[i]
                if moved:
                    old = self.mecs[self.prev_serving[i]]
                    disp = geo.distance(mec.pos, old.pos)
                    stats.handovers += 1
                else:
                    disp = 0.0
                ho = costs.HandoverContext(serving_is_best=not moved,
                                           mec_displacement=disp)
                bd = costs.offload_cost(
                    task, node, mec, float(self.dist[serving, i]), rate,
                    self.obstructions.g_ccdf(h), self.link, granted[i],
                    cfg.env_lambda_o, ho, self.cost_params,
                    rate_floor=cfg.env_rate_floor)
                stats.offloads += 1

            ok, _violated = costs.check_constraints(
                a.gamma, self.actions.rho_grid[a.rho], p_tx, mec.p_m,
                bd.ue_total, bd.t_total, self.constraints)
            if ok:
                rewards[i] = self.c_const - bd.v
            else:
                rewards[i] = self.penalty
                stats.violations += 1

            stats.sum_cost += bd.v
            breakdowns.append(bd)

        stats.reward_sum = float(rewards.sum())
        return breakdowns, rewards, stats

    def step(self, joint_action: list[ActionVector]) -> tuple[list[Transition], StepStats]:
        cfg = self.cfg
        states = [self._state_vector(i) for i in range(self.n_nodes)]
        indices = [self.actions.to_index(a) for a in joint_action]

        breakdowns, rewards, stats = self.evaluate_joint(joint_action)
        energy_drain = np.array([bd.ue_total * cfg.env_energy_drain
                                 for bd in breakdowns])
        for i, bd in enumerate(breakdowns):
            self.v_running[i] += bd.v

        # advance the world
        self.t += 1
        self.psi_steps += 1
        for i, node in enumerate(self.nodes):
            node.ue = max(node.ue - energy_drain[i], 0.0)
        pos = self._node_motion.advance()
        for i, node in enumerate(self.nodes):
            node.pos = geo.Position3D(*pos[i])
        if self._aerial_idx:
            mpos = self._mec_motion.advance()
            for k, j in enumerate(self._aerial_idx):
                self.mecs[j].pos = geo.Position3D(*mpos[k])

        prev_serving_snapshot = self.serving.copy()
        self._refresh_channel()
        self.prev_serving = prev_serving_snapshot
        self.tasks = [self._sample_task(n.pos) for n in self.nodes]

        depleted = any(n.ue <= 0.0 for n in self.nodes)
        comp_after = self.t >= cfg.env_horizon or depleted

        transitions = []
        for i in range(self.n_nodes):
            transitions.append(Transition(
                s=states[i], a=indices[i], r=float(rewards[i]),
                s_next=self._state_vector(i), comp=comp_after,
                uid=(i, self.episode_index, self.t - 1)))
        return transitions, stats
