"""Minimal feed-forward network with manual backprop and Adam.

ReLU hidden layers, linear (Q-head) or softmax (classifier head) output.
Losses are squared TD errors over sampled batches; gradients are exact and
verified by central finite differences.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import BatchError, ShapeError

_ACTIVATIONS = ("linear", "relu", "softmax")


@dataclass(frozen=True)
class MlpSpec:
    """Layer widths (input, hidden..., output) and the output activation."""

    widths: tuple[int, ...]
    output_activation: str = "linear"

    def __post_init__(self):
        if len(self.widths) < 3:
            raise ValueError("need at least one hidden layer")
        if any(w <= 0 for w in self.widths):
            raise ValueError("layer widths must be positive")
        if self.output_activation not in ("linear", "softmax"):
            raise ValueError(f"unknown output activation {self.output_activation!r}")

    @property
    def n_layers(self) -> int:
        return len(self.widths) - 1


@dataclass
class ParamSet:
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    step: int = 0

    def copy(self) -> "ParamSet":
        return ParamSet([w.copy() for w in self.weights],
                        [b.copy() for b in self.biases], self.step)

    def flat(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.weights + self.biases])

    def n_params(self) -> int:
        return sum(a.size for a in self.weights) + sum(a.size for a in self.biases)


def init_params(spec: MlpSpec, rng: np.random.Generator,
                final_scale: float = 0.01) -> ParamSet:
    """He-uniform initialization; final layer scaled down to keep the
    initial Q-values near zero."""
    weights, biases = [], []
    for i in range(spec.n_layers):
        fan_in, fan_out = spec.widths[i], spec.widths[i + 1]
        limit = np.sqrt(6.0 / fan_in)
        w = rng.uniform(-limit, limit, size=(fan_in, fan_out))
        if i == spec.n_layers - 1:
            w *= final_scale
        weights.append(w)
        biases.append(np.zeros(fan_out))
    return ParamSet(weights, biases)


def zeros_like_params(params: ParamSet) -> ParamSet:
    return ParamSet([np.zeros_like(w) for w in params.weights],
                    [np.zeros_like(b) for b in params.biases])


def _check_input(spec: MlpSpec, x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != spec.widths[0]:
        raise ShapeError(f"input width {x.shape[1]} != spec {spec.widths[0]}")
    return x


def forward(spec: MlpSpec, params: ParamSet, x: np.ndarray) -> np.ndarray:
    """Forward pass; returns (batch, out) or (out,) matching the input rank."""
    squeeze = np.asarray(x).ndim == 1
    h = _check_input(spec, x)
    for i in range(spec.n_layers):
        h = h @ params.weights[i] + params.biases[i]
        if i < spec.n_layers - 1:
            h = np.maximum(h, 0.0)
    if spec.output_activation == "softmax":
        h = h - h.max(axis=1, keepdims=True)
        e = np.exp(h)
        h = e / e.sum(axis=1, keepdims=True)
    return h[0] if squeeze else h


def _forward_cached(spec: MlpSpec, params: ParamSet, x: np.ndarray):
    """Forward pass keeping pre-activations for backprop (linear output only)."""
    h = _check_input(spec, x)
    acts = [h]           # post-activation inputs to each layer
    pre = []
    for i in range(spec.n_layers):
        z = acts[-1] @ params.weights[i] + params.biases[i]
        pre.append(z)
        if i < spec.n_layers - 1:
            acts.append(np.maximum(z, 0.0))
    return pre[-1], acts, pre


def _backprop(spec: MlpSpec, params: ParamSet, acts, pre,
              dout: np.ndarray) -> ParamSet:
    """Backpropagate dL/d(output) through a linear-output network."""
    grads = zeros_like_params(params)
    delta = dout
    for i in reversed(range(spec.n_layers)):
        grads.weights[i][...] = acts[i].T @ delta
        grads.biases[i][...] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ params.weights[i].T) * (pre[i - 1] > 0.0)
    return grads


def q_gather(q: np.ndarray, actions: np.ndarray) -> np.ndarray:
    """Q-values of the chosen action per row."""
    return q[np.arange(q.shape[0]), actions]


def td_loss_with_targets(spec: MlpSpec, params: ParamSet,
                         params_prev: ParamSet | None,
                         states: np.ndarray, actions: np.ndarray,
                         targets: np.ndarray,
                         use_prev_net_sum: bool = True) -> tuple[float, ParamSet]:
    """Mean squared TD error and its gradient w.r.t. the current params.

    The prediction is Q(s,a) of the current net, plus (optionally) the
    previous-snapshot net's Q(s,a) added as a constant term.
    """
    if spec.output_activation != "linear":
        raise ShapeError("TD losses require a linear Q-head")
    states = np.atleast_2d(states)
    if states.shape[0] == 0:
        raise BatchError("empty batch")
    actions = np.asarray(actions, dtype=int)
    targets = np.asarray(targets, dtype=float)
    out, acts, pre = _forward_cached(spec, params, states)
    pred = q_gather(out, actions)
    if use_prev_net_sum and params_prev is not None:
        pred = pred + q_gather(forward(spec, params_prev, states), actions)
    resid = pred - targets
    n = states.shape[0]
    loss = float(np.mean(resid ** 2))
    dout = np.zeros_like(out)
    dout[np.arange(n), actions] = 2.0 * resid / n
    return loss, _backprop(spec, params, acts, pre, dout)


def bootstrap_targets(spec: MlpSpec, params_target: ParamSet,
                      rewards: np.ndarray, next_states: np.ndarray,
                      dones: np.ndarray, zeta: float) -> np.ndarray:
    """Single-net bootstrapped targets r + zeta * max_a Q_target(s'); zero
    bootstrap on terminal transitions."""
    q_next = forward(spec, params_target, np.atleast_2d(next_states))
    boot = q_next.max(axis=1)
    return np.asarray(rewards, dtype=float) + zeta * boot * (1.0 - np.asarray(dones, dtype=float))


def td_loss_mean(spec: MlpSpec, batch: dict, theta: ParamSet,
                 theta_target: ParamSet, theta_prev: ParamSet | None,
                 zeta: float, use_prev_net_sum: bool = True) -> tuple[float, ParamSet]:
    """Squared-error loss of the mean network against the bootstrapped
    target of its target network."""
    targets = bootstrap_targets(spec, theta_target, batch["r"],
                                batch["s_next"], batch["done"], zeta)
    return td_loss_with_targets(spec, theta, theta_prev, batch["s"],
                                batch["a"], targets, use_prev_net_sum)


def td_loss_uncertainty(spec: MlpSpec, batch: dict, phi: ParamSet,
                        phi_target: ParamSet, phi_prev: ParamSet | None,
                        zeta: float, use_prev_net_sum: bool = True) -> tuple[float, ParamSet]:
    """Same structure as the mean loss, applied to the uncertainty network."""
    targets = bootstrap_targets(spec, phi_target, batch["r"],
                                batch["s_next"], batch["done"], zeta)
    return td_loss_with_targets(spec, phi, phi_prev, batch["s"],
                                batch["a"], targets, use_prev_net_sum)


@dataclass
class AdamState:
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    m: ParamSet | None = None
    v: ParamSet | None = None

    def __post_init__(self):
        if self.lr < 0:
            raise ValueError("learning rate must be non-negative")


def adam_step(params: ParamSet, grads: ParamSet, adam: AdamState) -> ParamSet:
    """One in-place Adam update with bias correction; increments the step
    counter. Raises on non-finite gradients."""
    if adam.m is None:
        adam.m = zeros_like_params(params)
        adam.v = zeros_like_params(params)
    params.step += 1
    t = params.step
    for group in ("weights", "biases"):
        ps = getattr(params, group)
        gs = getattr(grads, group)
        ms = getattr(adam.m, group)
        vs = getattr(adam.v, group)
        for p, g, m, v in zip(ps, gs, ms, vs):
            if not np.all(np.isfinite(g)):
                raise FloatingPointError("non-finite gradient")
            m *= adam.beta1
            m += (1.0 - adam.beta1) * g
            v *= adam.beta2
            v += (1.0 - adam.beta2) * g * g
            m_hat = m / (1.0 - adam.beta1 ** t)
            v_hat = v / (1.0 - adam.beta2 ** t)
            p -= adam.lr * m_hat / (np.sqrt(v_hat) + adam.eps)
    return params


def _set_flat_coord(params: ParamSet, idx: int, value: float):
    offset = 0
    for a in params.weights + params.biases:
        if idx < offset + a.size:
            a.ravel()[idx - offset] = value
            return
        offset += a.size
    raise IndexError(idx)


def _get_flat_coord(params: ParamSet, idx: int) -> float:
    offset = 0
    for a in params.weights + params.biases:
        if idx < offset + a.size:
            return float(a.ravel()[idx - offset])
        offset += a.size
    raise IndexError(idx)


def relu_pattern(spec: MlpSpec, params: ParamSet, states: np.ndarray) -> bytes:
    """Active-unit mask of all hidden layers; used to detect kink crossings."""
    h = _check_input(spec, states)
    bits = []
    for i in range(spec.n_layers - 1):
        z = h @ params.weights[i] + params.biases[i]
        bits.append((z > 0.0).tobytes())
        h = np.maximum(z, 0.0)
    return b"".join(bits)


def finite_diff_check(spec: MlpSpec, params: ParamSet, loss_fn,
                      states: np.ndarray, rng: np.random.Generator,
                      n_coords: int = 30, h: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients
    over sampled coordinates.

    ``loss_fn(params)`` must return (loss, grads). Coordinates whose
    perturbation flips a ReLU activation are skipped (subgradient exclusion).
    """
    _, grads = loss_fn(params)
    flat_g = grads.flat()
    n_total = params.n_params()
    coords = rng.choice(n_total, size=min(n_coords, n_total), replace=False)
    worst = 0.0
    base_pattern = relu_pattern(spec, params, states)
    for idx in coords:
        orig = _get_flat_coord(params, idx)
        _set_flat_coord(params, idx, orig + h)
        pat_plus = relu_pattern(spec, params, states)
        loss_plus, _ = loss_fn(params)
        _set_flat_coord(params, idx, orig - h)
        pat_minus = relu_pattern(spec, params, states)
        loss_minus, _ = loss_fn(params)
        _set_flat_coord(params, idx, orig)
        if pat_plus != base_pattern or pat_minus != base_pattern:
            continue  # kink-adjacent coordinate
        numeric = (loss_plus - loss_minus) / (2.0 * h)
        analytic = flat_g[idx]
        rel = abs(analytic - numeric) / (abs(analytic) + 1e-8)
        worst = max(worst, rel)
    return worst


# --- checkpoint format -----------------------------------------------------
# Little-endian binary layout:
#   magic   8 bytes  b"MECOFFP1"
#   uint32  number of layers boundaries (len(widths))
#   uint32  output activation code (0 linear, 1 softmax)
#   uint32* layer widths
#   uint64  step counter
#   float64* per layer: W (fan_in*fan_out, row-major) then b (fan_out)
#   uint8   has_adam (0/1)
#   if has_adam: float64 lr, beta1, beta2, eps; then m and v in param layout

_MAGIC = b"MECOFFP1"


def save_checkpoint(path, spec: MlpSpec, params: ParamSet,
                    adam: AdamState | None = None):
    with open(path, "wb") as f:
        f.write(_MAGIC)
        f.write(struct.pack("<II", len(spec.widths),
                            0 if spec.output_activation == "linear" else 1))
        f.write(struct.pack(f"<{len(spec.widths)}I", *spec.widths))
        f.write(struct.pack("<Q", params.step))
        for w, b in zip(params.weights, params.biases):
            f.write(w.astype("<f8").tobytes())
            f.write(b.astype("<f8").tobytes())
        has_adam = adam is not None and adam.m is not None
        f.write(struct.pack("<B", 1 if has_adam else 0))
        if has_adam:
            f.write(struct.pack("<dddd", adam.lr, adam.beta1, adam.beta2, adam.eps))
            for ps in (adam.m, adam.v):
                for w, b in zip(ps.weights, ps.biases):
                    f.write(w.astype("<f8").tobytes())
                    f.write(b.astype("<f8").tobytes())


def _read_param_arrays(f, spec: MlpSpec) -> ParamSet:
    weights, biases = [], []
    for i in range(spec.n_layers):
        fi, fo = spec.widths[i], spec.widths[i + 1]
        w = np.frombuffer(f.read(8 * fi * fo), dtype="<f8").reshape(fi, fo).copy()
        b = np.frombuffer(f.read(8 * fo), dtype="<f8").copy()
        weights.append(w)
        biases.append(b)
    return ParamSet(weights, biases)


def load_checkpoint(path) -> tuple[MlpSpec, ParamSet, AdamState | None]:
    with open(path, "rb") as f:
        if f.read(8) != _MAGIC:
            raise ValueError("not a parameter checkpoint (bad magic)")
        n_widths, act_code = struct.unpack("<II", f.read(8))
        widths = struct.unpack(f"<{n_widths}I", f.read(4 * n_widths))
        spec = MlpSpec(tuple(widths), "linear" if act_code == 0 else "softmax")
        (step,) = struct.unpack("<Q", f.read(8))
        params = _read_param_arrays(f, spec)
        params.step = step
        (has_adam,) = struct.unpack("<B", f.read(1))
        adam = None
        if has_adam:
            lr, b1, b2, eps = struct.unpack("<dddd", f.read(32))
            adam = AdamState(lr=lr, beta1=b1, beta2=b2, eps=eps)
            adam.m = _read_param_arrays(f, spec)
            adam.v = _read_param_arrays(f, spec)
    return spec, params, adam
