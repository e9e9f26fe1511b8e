"""Geometry, mobility, path loss, LoS probability, fading and MEC association.

All quantities are normalized scalars; unit conventions are fixed by the
experiment configuration, not by this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ChannelError, GeometryError


@dataclass(frozen=True)
class Position3D:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise GeometryError(f"non-finite position {(self.x, self.y, self.z)}")
        if self.z < 0:
            raise GeometryError(f"negative altitude z={self.z}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)


@dataclass(frozen=True)
class ChannelParams:
    """Carrier/propagation constants and aerial LoS environment constants."""

    f_c: float = 2e9          # carrier frequency
    c: float = 3e8            # propagation speed
    eta_los: float = 1.0      # LoS excess loss (dB)
    eta_nlos: float = 20.0    # NLoS excess loss (dB)
    alpha: float = 9.61       # aerial LoS environment constant
    beta: float = 0.16        # aerial LoS environment constant

    def __post_init__(self):
        if self.f_c <= 0 or self.c <= 0:
            raise ValueError("f_c and c must be positive")
        if self.eta_los > self.eta_nlos:
            raise ValueError("eta_los must not exceed eta_nlos")
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")


def exponential_height_ccdf(h_mean: float) -> Callable[[float], float]:
    """Complementary CDF exp(-h/h_mean) of obstruction heights."""
    if h_mean <= 0:
        raise ValueError("h_mean must be positive")

    def ccdf(h: float) -> float:
        return math.exp(-h / h_mean)

    return ccdf


@dataclass(frozen=True)
class ObstructionModel:
    """Obstruction field seen by ground links.

    ``g_ccdf`` is the complementary CDF of obstruction heights, evaluated
    pointwise; it must be non-increasing with range [0, 1].
    ``upper_limit`` selects the integration bound of the LoS integral:
    ``"half_ratio"`` uses D / (2 r_o), ``"half_times"`` uses (D / 2) * r_o.
    """

    r_o: float = 1.0
    lambda_o: float = 0.1
    g_ccdf: Callable[[float], float] = field(default_factory=lambda: exponential_height_ccdf(1.0))
    upper_limit: str = "half_ratio"

    def __post_init__(self):
        if self.r_o < 0 or self.lambda_o < 0:
            raise ValueError("r_o and lambda_o must be non-negative")
        if self.upper_limit not in ("half_ratio", "half_times"):
            raise ValueError(f"unknown upper_limit mode {self.upper_limit!r}")


@dataclass(frozen=True)
class FadingState:
    """One draw of the small-scale fading pair (Gaussian gain, Rician amplitude)."""

    g: float
    rd: float

    def __post_init__(self):
        if self.rd < 0:
            raise ValueError("Rician amplitude must be non-negative")


@dataclass(frozen=True)
class ChannelState:
    gain: float
    path_loss: float   # dB
    p_los: float
    rate: float

    def __post_init__(self):
        if not 0.0 <= self.p_los <= 1.0:
            raise ValueError(f"p_los={self.p_los} outside [0,1]")
        if self.gain < 0:
            raise ValueError("gain must be non-negative")


def distance(a: Position3D, b: Position3D) -> float:
    """Euclidean distance between two points."""
    return math.dist((a.x, a.y, a.z), (b.x, b.y, b.z))


def elevation_angle_deg(m: Position3D, n: Position3D) -> float:
    """Elevation angle (degrees) of m as seen from n."""
    d = distance(m, n)
    if d == 0:
        raise GeometryError("zero distance: elevation angle undefined")
    s = (m.z - n.z) / d
    s = min(1.0, max(-1.0, s))
    return math.degrees(math.asin(s))


def p_los_aerial(m: Position3D, n: Position3D, p: ChannelParams) -> float:
    """LoS probability of an air-to-ground link: a logistic curve in the
    elevation angle, 1 / (1 + alpha * exp(-beta * (theta_deg - alpha)))."""
    theta = elevation_angle_deg(m, n)
    return 1.0 / (1.0 + p.alpha * math.exp(-p.beta * (theta - p.alpha)))


def p_los_ground(m: Position3D, n: Position3D, o: ObstructionModel,
                 panels: int = 100) -> float:
    """LoS probability of a ground link through a random obstruction field:
    exp(-2 r_o lambda_o * integral of G(h)), integral by trapezoid quadrature."""
    if o.lambda_o == 0.0 or o.r_o == 0.0:
        return 1.0
    d = distance(m, n)
    if d == 0.0:
        return 1.0
    if o.upper_limit == "half_ratio":
        upper = d / (2.0 * o.r_o)
    else:
        upper = (d / 2.0) * o.r_o
    hs = np.linspace(0.0, upper, panels + 1)
    gs = np.array([o.g_ccdf(h) for h in hs])
    integral = float(np.trapezoid(gs, hs))
    val = math.exp(-2.0 * o.r_o * o.lambda_o * integral)
    return min(1.0, max(0.0, val))


def mean_excess_loss(p_los: float, p: ChannelParams) -> float:
    """Mean excess loss: LoS/NLoS losses weighted by the LoS probability."""
    if not 0.0 <= p_los <= 1.0:
        raise ValueError(f"p_los={p_los} outside [0,1]")
    return p_los * p.eta_los + (1.0 - p_los) * p.eta_nlos


def path_loss(m: Position3D, n: Position3D, p: ChannelParams, excess: float) -> float:
    """Free-space-style path loss in dB with additive excess loss:
    20 log10(4 pi f_c / c) + 20 log10(D) + excess."""
    d = distance(m, n)
    if d == 0:
        raise GeometryError("zero distance: path loss singular")
    return 20.0 * math.log10(4.0 * math.pi * p.f_c / p.c) + 20.0 * math.log10(d) + excess


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def channel_gain(fading: FadingState, dist: float, pl_linear: float) -> float:
    """Channel gain h = sqrt(g * rd / (D * PL)) with PL in linear domain."""
    if dist <= 0 or pl_linear <= 0:
        raise ChannelError(f"non-positive denominator: D={dist}, PL={pl_linear}")
    return math.sqrt(fading.g * fading.rd / (dist * pl_linear))


def data_rate(gain: float, tx_power: float, noise: float, bandwidth: float) -> float:
    """Shannon-style rate B * log2(1 + P * h^2 / noise).

    Returns 0 for zero transmit power or zero gain; callers substitute the
    configured floor rate.
    """
    if bandwidth <= 0 or noise <= 0:
        raise ValueError("bandwidth and noise must be positive")
    if tx_power < 0:
        raise ValueError("tx_power must be non-negative")
    snr = tx_power * gain * gain / noise
    return bandwidth * math.log2(1.0 + snr)


def sample_fading(rng: np.random.Generator, k_factor: float = 3.0) -> FadingState:
    """Draw a fading pair: |N(0,1)| small-scale gain and a unit-power Rician
    amplitude with the given K-factor."""
    g = abs(float(rng.standard_normal()))
    s = math.sqrt(k_factor / (k_factor + 1.0))
    sigma = math.sqrt(1.0 / (2.0 * (k_factor + 1.0)))
    re = s + sigma * float(rng.standard_normal())
    im = sigma * float(rng.standard_normal())
    rd = math.hypot(re, im)
    return FadingState(g=g, rd=rd)


def associate(gains: Sequence[float]) -> int:
    """Index of the MEC with maximal channel gain; ties break to the lowest index."""
    if len(gains) == 0:
        raise ChannelError("no MEC available for association")
    return int(np.argmax(gains))


class MobilityModel:
    """Constant-velocity motion with reflecting boundaries of a box arena.

    Velocities are drawn uniformly per node at reset; ``advance`` mutates
    the stored positions in place and returns them.
    """

    def __init__(self, positions: np.ndarray, arena: tuple[float, float, float],
                 speed_max: float, rng: np.random.Generator):
        self.positions = np.asarray(positions, dtype=float).copy()
        self.arena = np.asarray(arena, dtype=float)
        n = self.positions.shape[0]
        self.velocities = rng.uniform(-speed_max, speed_max, size=(n, 3))

    def advance(self, dt: float = 1.0) -> np.ndarray:
        self.positions += self.velocities * dt
        for axis in range(3):
            hi = self.arena[axis]
            over = self.positions[:, axis] > hi
            under = self.positions[:, axis] < 0.0
            self.positions[over, axis] = 2.0 * hi - self.positions[over, axis]
            self.positions[under, axis] = -self.positions[under, axis]
            self.velocities[over | under, axis] *= -1.0
            # a huge step could still land outside; clamp as a last resort
            np.clip(self.positions[:, axis], 0.0, hi, out=self.positions[:, axis])
        return self.positions
