"""Per-vehicle cost terms and the aggressiveness-controlled blend.

All terms are losses (lower is better).  Safety covers car-following
closing speed, crossing-point arrival mismatch, and lane keeping;
efficiency is squared time headway.  An aggressiveness parameter kappa
shifts weight between the two groups.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .dynamics import DEFAULT_VEHICLE, VehicleParams, VehicleState, sideslip
from .geometry import wrap_angle
from .network import Route

XI = 0.01  # regularizer keeping the crossing term finite at equal arrival times
HEADING_WEIGHT = 80.0
THW_CAP = 10.0  # headway saturates here when crawling
FREE_GAP = 50.0  # virtual gap when no leader is present
CRAWL_SLOPE = 1e-4  # residual speed incentive on the saturated branch


def balance_weights(kappa: float) -> tuple[float, float]:
    """(safety weight, efficiency weight); they sum to one."""
    if not -1.0 <= kappa <= 1.0:
        raise ValueError(f"aggressiveness {kappa} outside [-1, 1]")
    k_s = 1.0 / (1.0 + math.exp(2.0 * kappa))
    return k_s, 1.0 - k_s


def following_risk(v_host: float, v_leader: float, gap: float) -> float:
    """Squared closing rate over gap; zero when the leader pulls away."""
    if gap <= 0.0:
        raise ValueError(f"nonpositive gap: {gap}")
    dv = v_host - v_leader
    if dv < 0.0:
        return 0.0
    return (dv / gap) ** 2


def crossing_risk(d_host: float, v_host: float, d_other: float, v_other: float) -> float:
    """Penalty for arriving at a shared point at the same time.

    Arrival times are distance over speed; a stopped vehicle never
    arrives, which disarms the term.
    """
    if v_host <= 1e-9 or v_other <= 1e-9:
        return 0.0
    t_host = d_host / v_host
    t_other = d_other / v_other
    return 1.0 / ((t_host - t_other) ** 2 + XI)


def lane_errors(
    route: Route, state: VehicleState, delta_f: float, veh: VehicleParams = DEFAULT_VEHICLE
) -> tuple[float, float]:
    """(lateral offset, course error) of the body frame against the route.

    The course error compares the direction of motion, yaw plus sideslip,
    with the local route tangent, so steady cornering carries no error.
    """
    s, dy = route.project(state.x, state.y)
    dphi = wrap_angle(state.phi + sideslip(delta_f, veh) - route.tangent_at(s))
    return dy, dphi


def lane_keeping(dy: float, dphi: float) -> float:
    return dy * dy + HEADING_WEIGHT * dphi * dphi


def time_headway(gap: float, v: float) -> float:
    if v <= 1e-9:
        return THW_CAP
    return min(gap / v, THW_CAP)


def efficiency(gap: float, v: float) -> float:
    thw = time_headway(gap, v)
    cost = thw * thw
    # on the saturated branch the squared headway is flat in v, which
    # would make standstill a local optimum under the smallest-|a|
    # tie-break; keep a bounded slope so creeping forward still pays
    raw = gap / v if v > 1e-9 else math.inf
    if raw > THW_CAP:
        cost += min(CRAWL_SLOPE * (raw - THW_CAP), 1.0)
    return cost


@dataclass(frozen=True)
class CostTerms:
    v_log: float
    v_lat: float
    v_lk: float
    v_e: float
    omega_log: float
    omega_lat: float
    k_s: float
    k_e: float

    @property
    def safety(self) -> float:
        return self.omega_log * self.v_log + self.omega_lat * self.v_lat + self.v_lk

    @property
    def total(self) -> float:
        return self.k_s * self.safety + self.k_e * self.v_e
