"""Policy learners: tabular Q-learning, deep Q-learning, and decentralized
double deep Q-learning with a mean + Gaussian-scaled uncertainty value split.

Replay transitions are shared between agents once per episode through an
aggregator that rotates across agents; shards are content-hashed and
verified before merging.
"""

from __future__ import annotations

import hashlib
import pickle
from dataclasses import dataclass, field

import numpy as np

from . import nn
from .env import Transition
from .errors import ActionError, BatchError


def epsilon_greedy(q_values: np.ndarray, epsilon: float,
                   rng: np.random.Generator) -> int:
    """Random action with probability epsilon, else argmax with lowest-index
    tie-break."""
    q_values = np.asarray(q_values)
    if q_values.size == 0:
        raise ActionError("empty action set")
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0,1]")
    if epsilon > 0.0 and rng.random() < epsilon:
        return int(rng.integers(q_values.size))
    return int(np.argmax(q_values))


def epsilon_schedule(episode: int, n_episodes: int, start: float, end: float,
                     floor_frac: float = 0.8) -> float:
    """Exponential decay from start to end, hitting the floor at
    floor_frac * n_episodes."""
    if end >= start:
        return start
    k = max(int(n_episodes * floor_frac), 1)
    frac = min(episode / k, 1.0)
    return max(end, start * (end / start) ** frac)


def q_compose(mean_out: np.ndarray, uncertainty_sample: np.ndarray) -> np.ndarray:
    """Exploration-time Q estimate: mean-network output plus the scaled
    uncertainty contribution."""
    mean_out = np.asarray(mean_out, dtype=float)
    uncertainty_sample = np.asarray(uncertainty_sample, dtype=float)
    if mean_out.shape != uncertainty_sample.shape:
        raise ValueError("mean and uncertainty outputs must match in shape")
    return mean_out + uncertainty_sample


# --- replay memory --------------------------------------------------------

class ReplayMemory:
    """Bounded transition store with uniform no-replacement batch sampling
    and deduplicating merge (keyed on transition uid, oldest evicted)."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        # ring buffer: once full, _pos points at the oldest slot
        self._buf: list[Transition] = []
        self._pos = 0
        self._uids: set[tuple] = set()

    def __len__(self) -> int:
        return len(self._buf)

    def add(self, tr: Transition):
        if tr.uid in self._uids:
            return
        if len(self._buf) < self.capacity:
            self._buf.append(tr)
        else:
            self._uids.discard(self._buf[self._pos].uid)
            self._buf[self._pos] = tr
            self._pos = (self._pos + 1) % self.capacity
        self._uids.add(tr.uid)

    def extend(self, transitions):
        for tr in transitions:
            self.add(tr)

    def sample(self, batch_size: int, rng: np.random.Generator) -> dict:
        if len(self._buf) < batch_size:
            raise BatchError(f"memory {len(self._buf)} < batch {batch_size}")
        idx = rng.choice(len(self._buf), size=batch_size, replace=False)
        batch = [self._buf[i] for i in idx]
        return {
            "s": np.stack([t.s for t in batch]),
            "a": np.array([t.a for t in batch], dtype=int),
            "r": np.array([t.r for t in batch]),
            "s_next": np.stack([t.s_next for t in batch]),
            "done": np.array([t.comp for t in batch], dtype=float),
        }


@dataclass(frozen=True)
class MemoryDigest:
    """A serialized memory shard and the content hash that guards it."""

    digest: bytes
    payload: bytes


def serialize_transitions(transitions) -> bytes:
    rows = [(t.s.tobytes(), t.a, t.r, t.s_next.tobytes(), t.comp, t.uid,
             t.s.shape[0]) for t in transitions]
    return pickle.dumps(rows, protocol=4)


def deserialize_transitions(payload: bytes) -> list[Transition]:
    rows = pickle.loads(payload)
    out = []
    for s_b, a, r, sn_b, comp, uid, dim in rows:
        out.append(Transition(
            s=np.frombuffer(s_b, dtype=float, count=dim).copy(),
            a=a, r=r,
            s_next=np.frombuffer(sn_b, dtype=float, count=dim).copy(),
            comp=comp, uid=uid))
    return out


def make_shard(transitions) -> MemoryDigest:
    payload = serialize_transitions(transitions)
    return MemoryDigest(digest=hashlib.sha256(payload).digest(), payload=payload)


def merge_shard(memory: ReplayMemory, shard: MemoryDigest) -> bool:
    """Verify-then-merge; returns False (and merges nothing) on hash
    mismatch."""
    if hashlib.sha256(shard.payload).digest() != shard.digest:
        return False
    memory.extend(deserialize_transitions(shard.payload))
    return True


def aggregate_and_distribute(agents, round_index: int) -> int:
    """One memory-sharing round: the aggregator (rotating round mod N)
    collects every agent's fresh transitions as hashed shards and broadcasts
    them; each agent verifies and merges. Returns the count of rejected
    shards."""
    if not agents:
        raise ValueError("need at least one agent")
    _aggregator = agents[round_index % len(agents)]  # rotation rule
    shards = [make_shard(a.fresh) for a in agents]
    rejected = 0
    for agent in agents:
        for shard in shards:
            if not merge_shard(agent.memory, shard):
                rejected += 1
    for a in agents:
        a.fresh = []
    return rejected


# --- tabular Q-learning ---------------------------------------------------

class QTable:
    """Sparse state-bucket x action table; unseen entries default to 0."""

    def __init__(self, n_actions: int):
        self.n_actions = n_actions
        self.table: dict[tuple, np.ndarray] = {}
        self.visits: dict[tuple, int] = {}

    def q_values(self, bucket: tuple) -> np.ndarray:
        if bucket not in self.table:
            self.table[bucket] = np.zeros(self.n_actions)
        return self.table[bucket]


def bucketize_state(state: np.ndarray, buckets: tuple) -> tuple:
    """Discretize the (normalized) state for the tabular learner using the
    data size, serving gain and latency threshold features."""
    feats = (state[1], state[0], state[13])
    out = []
    for x, k in zip(feats, buckets):
        u = (float(x) + 1.0) / 2.0
        out.append(min(max(int(u * k), 0), k - 1))
    return tuple(out)


def q_update_tabular(qt: QTable, bucket: tuple, action: int, reward: float,
                     next_bucket: tuple, done: bool, psi: float,
                     zeta: float) -> float:
    """In-place update Q += psi * (r + zeta * max_a' Q(s') - Q); terminal
    transitions bootstrap with zero. Returns the new entry."""
    q = qt.q_values(bucket)
    boot = 0.0 if done else float(np.max(qt.q_values(next_bucket)))
    q[action] += psi * (reward + zeta * boot - q[action])
    qt.visits[bucket] = qt.visits.get(bucket, 0) + 1
    return float(q[action])


class TabularAgent:
    """Per-node tabular Q-learner over a coarse state discretization."""

    def __init__(self, n_actions: int, buckets: tuple, psi: float, zeta: float):
        self.qt = QTable(n_actions)
        self.buckets = buckets
        self.psi = psi
        self.zeta = zeta

    def act(self, state: np.ndarray, epsilon: float,
            rng: np.random.Generator) -> int:
        q = self.qt.q_values(bucketize_state(state, self.buckets))
        return epsilon_greedy(q, epsilon, rng)

    def observe(self, tr: Transition):
        q_update_tabular(self.qt, bucketize_state(tr.s, self.buckets), tr.a,
                         tr.r, bucketize_state(tr.s_next, self.buckets),
                         tr.comp, self.psi, self.zeta)


# --- deep Q-learning ------------------------------------------------------

@dataclass
class HyperParams:
    psi: float = 1e-4
    zeta: float = 0.9
    batch_size: int = 64
    target_sync_period: int = 200
    memory_capacity: int = 20000
    unc_scale: float = 1.0
    use_prev_net_sum: bool = True
    tvf_verbatim: bool = False


class DqlAgent:
    """Single-network deep Q-learner with target network and replay."""

    def __init__(self, spec: nn.MlpSpec, h: HyperParams,
                 rng: np.random.Generator, memory: ReplayMemory | None = None):
        self.spec = spec
        self.h = h
        self.params = nn.init_params(spec, rng)
        self.target = self.params.copy()
        self.adam = nn.AdamState(lr=h.psi)
        self.memory = memory if memory is not None else ReplayMemory(h.memory_capacity)
        self.fresh: list[Transition] = []
        self.updates = 0

    def q_values(self, state: np.ndarray) -> np.ndarray:
        return nn.forward(self.spec, self.params, state)

    def act(self, state: np.ndarray, epsilon: float,
            rng: np.random.Generator) -> int:
        return epsilon_greedy(self.q_values(state), epsilon, rng)

    def observe(self, tr: Transition):
        self.memory.add(tr)
        self.fresh.append(tr)

    def train_step(self, rng: np.random.Generator) -> float | None:
        """One optimizer step from a sampled batch; returns the loss, or
        None during warm-up."""
        if len(self.memory) < self.h.batch_size:
            return None
        batch = self.memory.sample(self.h.batch_size, rng)
        targets = nn.bootstrap_targets(self.spec, self.target, batch["r"],
                                       batch["s_next"], batch["done"],
                                       self.h.zeta)
        loss, grads = nn.td_loss_with_targets(
            self.spec, self.params, None, batch["s"], batch["a"], targets,
            use_prev_net_sum=False)
        nn.adam_step(self.params, grads, self.adam)
        self.updates += 1
        if self.updates % self.h.target_sync_period == 0:
            self.target = self.params.copy()
        return loss


def ddql_target(agent: "DdqlAgent", rewards: np.ndarray,
                next_states: np.ndarray, dones: np.ndarray) -> np.ndarray:
    """Double-Q bootstrapped targets: the online mean net selects the next
    action, the target mean net evaluates it; terminal transitions use the
    bare reward."""
    next_states = np.atleast_2d(next_states)
    q_online = nn.forward(agent.spec, agent.theta, next_states)
    a_star = np.argmax(q_online, axis=1)
    if agent.h.tvf_verbatim:
        # printed target form: reward + learning-rate-scaled online value
        boot = agent.h.psi * nn.q_gather(q_online, a_star)
    else:
        q_eval = nn.forward(agent.spec, agent.theta_target, next_states)
        boot = agent.h.zeta * nn.q_gather(q_eval, a_star)
    return np.asarray(rewards, dtype=float) + boot * (1.0 - np.asarray(dones, dtype=float))


class DdqlAgent:
    """Decentralized double deep Q-learner with mean and uncertainty
    networks, target copies, and previous-step snapshots."""

    def __init__(self, spec: nn.MlpSpec, h: HyperParams,
                 rng: np.random.Generator):
        self.spec = spec
        self.h = h
        self.theta = nn.init_params(spec, rng)
        self.theta_target = self.theta.copy()
        self.theta_prev = self.theta.copy()
        self.phi = nn.init_params(spec, rng)
        self.phi_target = self.phi.copy()
        self.phi_prev = self.phi.copy()
        self.adam_theta = nn.AdamState(lr=h.psi)
        self.adam_phi = nn.AdamState(lr=h.psi)
        self.memory = ReplayMemory(h.memory_capacity)
        self.fresh: list[Transition] = []
        self.updates = 0

    def q_values(self, state: np.ndarray) -> np.ndarray:
        """Evaluation-time values: mean network alone."""
        return nn.forward(self.spec, self.theta, state)

    def act(self, state: np.ndarray, epsilon: float,
            rng: np.random.Generator) -> int:
        mean = self.q_values(state)
        scale = self.h.unc_scale * epsilon
        if scale > 0.0:
            unc = nn.forward(self.spec, self.phi, state)
            sample = scale * rng.standard_normal(unc.shape[0]) * unc
            q = q_compose(mean, sample)
        else:
            q = mean
        return epsilon_greedy(q, epsilon, rng)

    def observe(self, tr: Transition):
        self.memory.add(tr)
        self.fresh.append(tr)

    def train_step(self, rng: np.random.Generator) -> float | None:
        if len(self.memory) < self.h.batch_size:
            return None
        batch = self.memory.sample(self.h.batch_size, rng)
        targets = ddql_target(self, batch["r"], batch["s_next"], batch["done"])

        theta_snapshot = self.theta.copy()
        phi_snapshot = self.phi.copy()
        loss_v, grads_v = nn.td_loss_with_targets(
            self.spec, self.theta, self.theta_prev, batch["s"], batch["a"],
            targets, use_prev_net_sum=self.h.use_prev_net_sum)
        nn.adam_step(self.theta, grads_v, self.adam_theta)
        loss_m, grads_m = nn.td_loss_with_targets(
            self.spec, self.phi, self.phi_prev, batch["s"], batch["a"],
            targets, use_prev_net_sum=self.h.use_prev_net_sum)
        nn.adam_step(self.phi, grads_m, self.adam_phi)
        self.theta_prev = theta_snapshot
        self.phi_prev = phi_snapshot

        self.updates += 1
        if self.updates % self.h.target_sync_period == 0:
            self.theta_target = self.theta.copy()
            self.phi_target = self.phi.copy()
        return loss_v + loss_m
