"""Task model and the execution-time / energy / weighted-cost accounting.

Formulas operate on normalized scalars. Time and energy components follow
the simulator's additive offload decomposition:

    T_offload  = T_tr,n + T_mec + T_tr,m + T_handover
    Ue_offload = Ue_tr,n + Ue_mec + Ue_tr,m + Ue_handover

and the weighted cost is the convex combination kappa*T + (1-kappa)*Ue.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

from .geo import Position3D


@dataclass(frozen=True)
class Task:
    """One indivisible offloadable unit."""

    cat: int                # urgency category (0 = highest priority)
    data: float             # input size
    ck: float               # compute complexity (cycles per bit)
    th_max: float           # latency threshold
    origin: Position3D
    cdata: float = 0.0      # result size; defaults to 0.1*data when unset

    def __post_init__(self):
        if self.data <= 0:
            raise ValueError("task data size must be positive")
        if self.ck <= 0:
            raise ValueError("task complexity must be positive")
        if self.th_max <= 0:
            raise ValueError("latency threshold must be positive")
        if self.cdata == 0.0:
            object.__setattr__(self, "cdata", 0.1 * self.data)
        if self.cdata > self.data:
            raise ValueError("result size must not exceed input size")


@dataclass
class UserNode:
    id: int
    pos: Position3D
    f_n: float              # local CPU frequency
    ue: float               # remaining energy budget
    p_tx: float             # transmit power
    ue_tr: float = 1.0      # per-transmission energy coefficient

    def __post_init__(self):
        if self.f_n <= 0:
            raise ValueError("node CPU frequency must be positive")
        if self.ue < 0:
            raise ValueError("node energy must be non-negative")


@dataclass
class MecNode:
    id: int
    pos: Position3D
    kind: str               # "aerial" | "ground"
    f_max: float            # max compute frequency
    cr_max: float           # total computational resources
    p_m: float              # operating power
    ue_m: float = 1.0       # per-execution energy coefficient
    ue_tr_m: float = 1.0    # return-transmission energy coefficient

    def __post_init__(self):
        if self.kind not in ("aerial", "ground"):
            raise ValueError(f"unknown MEC kind {self.kind!r}")
        if self.f_max <= 0 or self.cr_max <= 0:
            raise ValueError("MEC compute capacity must be positive")


@dataclass(frozen=True)
class LinkParams:
    delay_tr: float = 1.0       # aggregate per-hop transmission delay factor
    delay_process: float = 1.0  # local processing delay factor

    def __post_init__(self):
        if self.delay_tr < 0 or self.delay_process < 0:
            raise ValueError("delay factors must be non-negative")


@dataclass(frozen=True)
class CostParams:
    kappa: float = 0.5
    # uplink/downlink scale factors de-degenerate the printed identical
    # uplink and downlink transmission-energy expressions
    uplink_scale: float = 1.0
    downlink_scale: float = 1.0
    ho_energy_uses_power: bool = False

    def __post_init__(self):
        if not 0.0 <= self.kappa <= 1.0:
            raise ValueError("kappa must lie in [0,1]")


@dataclass(frozen=True)
class ConstraintSet:
    ue_threshold: float
    t_max_task: float
    p_max_m: float
    p_max_n: float

    def __post_init__(self):
        for name in ("ue_threshold", "t_max_task", "p_max_m", "p_max_n"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class HandoverContext:
    """Whether the serving MEC still has the best gain, and how far the
    serving MEC moved since the previous association."""

    serving_is_best: bool = True
    mec_displacement: float = 0.0


@dataclass(frozen=True)
class CostBreakdown:
    t_local: float = 0.0
    t_tr_n: float = 0.0
    t_m: float = 0.0
    t_tr_m: float = 0.0
    t_ho: float = 0.0
    ue_local: float = 0.0
    ue_tr_n: float = 0.0
    ue_m: float = 0.0
    ue_tr_m: float = 0.0
    ue_ho: float = 0.0
    v: float = 0.0

    @property
    def t_total(self) -> float:
        return self.t_local + self.t_tr_n + self.t_m + self.t_tr_m + self.t_ho

    @property
    def ue_total(self) -> float:
        return (self.ue_local + self.ue_tr_n + self.ue_m
                + self.ue_tr_m + self.ue_ho)


LAMBDA_O_FLOOR = 1.0  # substituted when the obstruction density is zero


def local_cost(task: Task, n: UserNode, link: LinkParams,
               cp: CostParams) -> CostBreakdown:
    """Cost of executing the task on the user node itself."""
    t_local = task.data * task.ck * n.ue / n.f_n
    ue_local = n.f_n * task.ck * link.delay_process * n.p_tx
    return CostBreakdown(
        t_local=t_local, ue_local=ue_local,
        v=weighted_cost(t_local, ue_local, cp),
    )


def offload_times(task: Task, n: UserNode, m: MecNode, dist: float,
                  rate: float, link: LinkParams, rho: float,
                  lambda_o: float, ho: HandoverContext,
                  rate_floor: float = 1e-6) -> tuple[float, float, float, float]:
    """Uplink, MEC-execution, downlink and handover times of one offload."""
    if rho <= 0 or rho > 1:
        raise ValueError(f"rho={rho} outside (0,1]")
    lam = lambda_o if lambda_o > 0 else LAMBDA_O_FLOOR
    r = max(rate, rate_floor)
    t_tr_n = task.data * dist * link.delay_tr * n.ue_tr / (r * lam)
    t_m = task.ck * task.data * m.ue_m / (rho * m.f_max)
    t_tr_m = task.cdata * link.delay_tr * m.ue_tr_m / r
    if ho.serving_is_best:
        t_ho = 0.0
    else:
        t_ho = ho.mec_displacement * t_tr_m
    return t_tr_n, t_m, t_tr_m, t_ho


def offload_energies(task: Task, n: UserNode, m: MecNode, dist: float,
                     g_of_h: float, link: LinkParams, rho: float,
                     t_tr_m: float, ho: HandoverContext,
                     cp: CostParams) -> tuple[float, float, float, float]:
    """Uplink, MEC-execution, downlink and handover energies of one offload.

    ``g_of_h`` is the obstruction-height CCDF evaluated at the channel gain.
    """
    if rho <= 0 or rho > 1:
        raise ValueError(f"rho={rho} outside (0,1]")
    ue_tr_n = dist * link.delay_tr * g_of_h * cp.uplink_scale
    ue_m = m.f_max * rho * m.p_m
    ue_tr_m = link.delay_tr * g_of_h * dist * cp.downlink_scale
    if ho.serving_is_best:
        ue_ho = 0.0
    else:
        ue_ho = ho.mec_displacement * t_tr_m
        if cp.ho_energy_uses_power:
            ue_ho *= n.p_tx
    return ue_tr_n, ue_m, ue_tr_m, ue_ho


def offload_cost(task: Task, n: UserNode, m: MecNode, dist: float,
                 rate: float, g_of_h: float, link: LinkParams, rho: float,
                 lambda_o: float, ho: HandoverContext, cp: CostParams,
                 rate_floor: float = 1e-6) -> CostBreakdown:
    """Full offload cost breakdown for one (node, MEC) pair."""
    t_tr_n, t_m, t_tr_m, t_ho = offload_times(
        task, n, m, dist, rate, link, rho, lambda_o, ho, rate_floor)
    ue_tr_n, ue_m, ue_tr_m, ue_ho = offload_energies(
        task, n, m, dist, g_of_h, link, rho, t_tr_m, ho, cp)
    t_total = t_tr_n + t_m + t_tr_m + t_ho
    ue_total = ue_tr_n + ue_m + ue_tr_m + ue_ho
    return CostBreakdown(
        t_tr_n=t_tr_n, t_m=t_m, t_tr_m=t_tr_m, t_ho=t_ho,
        ue_tr_n=ue_tr_n, ue_m=ue_m, ue_tr_m=ue_tr_m, ue_ho=ue_ho,
        v=weighted_cost(t_total, ue_total, cp),
    )


def weighted_cost(t_total: float, ue_total: float, p: CostParams) -> float:
    """Convex time/energy combination kappa*T + (1-kappa)*Ue."""
    if t_total < 0 or ue_total < 0:
        raise ValueError("time and energy must be non-negative")
    return p.kappa * t_total + (1.0 - p.kappa) * ue_total


def total_cost(gammas: Sequence[int], local_costs: Sequence[float],
               offload_costs: Sequence[float]) -> float:
    """Sum of the chosen branch per task: gamma=0 local, gamma=1 offload."""
    total = 0.0
    for gamma, v_loc, v_off in zip(gammas, local_costs, offload_costs, strict=True):
        if gamma not in (0, 1):
            raise ValueError(f"gamma must be binary, got {gamma}")
        total += v_off if gamma else v_loc
    return total


def check_constraints(gamma: int, rho: float, p_n: float, p_m: float,
                      ue_total: float, t_total: float,
                      c: ConstraintSet) -> tuple[bool, list[str]]:
    """Evaluate the five feasibility constraints; bounds are inclusive."""
    violations = []
    if gamma not in (0, 1):
        violations.append("C1")
    if not 0.0 <= rho <= 1.0:
        violations.append("C2")
    if not (0.0 <= p_n <= c.p_max_n and 0.0 <= p_m <= c.p_max_m):
        violations.append("C3")
    if not 0.0 <= ue_total <= c.ue_threshold:
        violations.append("C4")
    if t_total > c.t_max_task:
        violations.append("C5")
    return (len(violations) == 0, violations)
