"""One decision step of the constrained coalitional negotiation.

Each non-cleared vehicle picks acceleration and steering for the next
interval.  A participation level p in [0, 1], derived from driving style,
blends the vehicle's own loss with the participation-weighted losses of
the others; p = 0 for everyone degenerates to independent best responses
and p = 1 to minimizing the common sum.  The joint problem is solved by
cyclic best response with a deterministic pattern search per vehicle.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

from .costs import (
    FREE_GAP,
    CostTerms,
    balance_weights,
    crossing_risk,
    efficiency,
    following_risk,
    lane_keeping,
)
from .dynamics import (
    DEFAULT_VEHICLE,
    ControlInput,
    VehicleParams,
    VehicleState,
    sideslip,
    step as integrate,
)
from .geometry import wrap_angle
from .network import Route

GRAVITY = 9.81
GAP_FLOOR = 0.01  # clamp for degenerate gaps during candidate evaluation


def participation(kappa: float) -> float:
    """exp(-pi kappa^2): full for a neutral style, fading for extreme ones."""
    if not -1.0 <= kappa <= 1.0:
        raise ValueError(f"aggressiveness {kappa} outside [-1, 1]")
    return math.exp(-math.pi * kappa * kappa)


def coalition_costs(values: Sequence[float], p: Sequence[float]) -> tuple[float, list[float]]:
    """Split each member's loss into a pooled share and a kept share.

    The pool collects p_i of member i's loss; the remainder stays private.
    """
    pooled = 0.0
    kept = []
    for vi, pi in zip(values, p, strict=True):
        pooled += pi * vi
        kept.append((1.0 - pi) * vi)
    return pooled, kept


def allocate(values: Sequence[float], p: Sequence[float]) -> list[float]:
    """Each member's charged share of the pooled loss; sums back to the pool."""
    return [pi * vi for vi, pi in zip(values, p, strict=True)]


@dataclass(frozen=True)
class Limits:
    """Hard bounds checked on the one-step-ahead predicted state."""

    v_max: float = 8.0
    a_max: float = 8.0
    jerk_max: float = 2.0
    delta_max: float = math.radians(30.0)
    mu: float = 0.85
    ttc_min: float = 1.5
    lane_dev_max: float = 0.2
    course_dev_max: float = math.radians(2.0)
    stop_margin: float = 3.5  # standstill clearance kept from any hazard point
    ttc_guard: float = 0.05  # enforcement slack so recorded residuals stay negative

    def beta_max(self) -> float:
        return math.atan(0.02 * self.mu * GRAVITY)

    def steer_box(self, veh: VehicleParams) -> float:
        """Effective steering bound: the plain box or the sideslip bound,
        whichever binds first."""
        via_beta = math.atan(math.tan(self.beta_max()) * veh.wheelbase / veh.l_r)
        return min(self.delta_max, via_beta)


@dataclass(frozen=True)
class SolverParams:
    max_sweeps: int = 20
    conv_tol: float = 1e-3
    feas_slack: float = 1e-9
    rationality_tol: float = 1e-6


@dataclass(frozen=True)
class CpRef:
    """One live crossing point as seen from a single vehicle."""

    partner: int
    s_self: float
    s_other: float
    gated: bool
    # along-route backoffs that keep a stopped vehicle clear of the other
    # path; computed from the crossing geometry, so shallow merges get a
    # longer one than right-angle crossings
    hold_self: float = 3.5
    hold_other: float = 3.5


@dataclass(frozen=True)
class PlayerView:
    """Everything the solver needs to know about one vehicle this step."""

    route: Route
    state: VehicleState
    s: float
    kappa: float
    p: float
    a_prev: float
    delta_prev: float
    player: bool
    coast: tuple[float, float]  # control applied when not a player
    lv: int | None = None
    lv_gated: bool = False
    cps: tuple[CpRef, ...] = ()


@dataclass
class StepSolution:
    controls: list[tuple[float, float]]
    terms: list[CostTerms | None]
    v_total: list[float | None]
    j_value: list[float | None]
    h_alloc: list[float]
    v_coalition: float
    p_used: list[float]
    rational: list[bool]
    rationality_residual: list[float]
    group_residual: float
    sweeps: int
    evals: int
    lateral_evals: int
    feasible: list[bool]
    emergency: list[bool]
    reset: list[bool]
    max_constraint_residual: float


def tracking_delta(route: Route, s: float, v: float, dt: float, limits: Limits, veh: VehicleParams) -> float:
    """Feedforward steering for the route curvature just ahead, clipped."""
    rho = route.curvature_at(s + max(v, 0.0) * dt)
    box = limits.steer_box(veh)
    return min(max(math.atan(rho * veh.wheelbase), -box), box)


def _ramp_peak_speed(v_next: float, a: float, dt: float, jerk_max: float) -> float:
    """Highest speed reachable if deceleration starts at full jerk now.

    One step at `a` is already inside v_next; the tail assumes the
    acceleration shrinks by jerk_max*dt every following step.
    """
    if a <= 0.0:
        return v_next
    k = int(a / (jerk_max * dt))
    return v_next + dt * (k * a - jerk_max * dt * k * (k + 1) / 2.0)


BOUND_NAMES = ("accel", "jerk", "steer", "speed", "lane", "course")


def bound_residuals(
    a: float,
    delta: float,
    a_prev: float,
    v_next: float,
    dy: float,
    dphi: float,
    dt: float,
    limits: Limits,
    steer_lim: float,
) -> tuple[float, float, float, float, float, float]:
    """Signed slack of each non-interactive limit, ordered as BOUND_NAMES.

    Nonpositive means satisfied.  The speed entry guards the whole
    jerk-limited ramp-down, not just the next sample, so a vehicle never
    commits to a speed it cannot back out of.
    """
    return (
        abs(a) - limits.a_max,
        abs(a - a_prev) / dt - limits.jerk_max,
        abs(delta) - steer_lim,
        _ramp_peak_speed(v_next, a, dt, limits.jerk_max) - limits.v_max,
        dy - limits.lane_dev_max,
        abs(dphi) - limits.course_dev_max,
    )


def closing_ttc(
    x_a: float, y_a: float, vx_a: float, vy_a: float,
    x_b: float, y_b: float, vx_b: float, vy_b: float,
) -> float:
    """Separation over closing speed between two moving points.

    Infinite when the pair is separating or holding distance, zero when
    the points coincide.  Meaningful for same-direction (car-following)
    geometry; crossing paths are handled by point-arrival standoffs.
    """
    rx, ry = x_b - x_a, y_b - y_a
    dist = math.hypot(rx, ry)
    if dist < 1e-9:
        return 0.0
    closing = -(rx * (vx_b - vx_a) + ry * (vy_b - vy_a)) / dist
    if closing <= 1e-12:
        return math.inf
    return dist / closing


def _commit_stop_profile(
    v0: float, a0: float, dt: float, limits: Limits
) -> list[tuple[float, float, float]]:
    """Sample the max-effort stop from speed v0 and acceleration a0.

    Acceleration ramps down at the jerk bound until it saturates at
    -a_max, then holds until standstill.  Returns (tau, v, x) samples at
    half-step resolution plus the exact standstill point.
    """
    j, am = limits.jerk_max, limits.a_max
    if v0 <= 0.0 and a0 <= 0.0:
        return [(0.0, 0.0, 0.0)]
    h = 0.5 * dt
    tau_r = max((a0 + am) / j, 0.0)
    v_r = v0 + a0 * tau_r - 0.5 * j * tau_r * tau_r
    x_r = v0 * tau_r + 0.5 * a0 * tau_r * tau_r - j * tau_r**3 / 6.0
    samples: list[tuple[float, float, float]] = []
    tau = 0.0
    while tau < 60.0:
        if tau <= tau_r:
            v = v0 + a0 * tau - 0.5 * j * tau * tau
            x = v0 * tau + 0.5 * a0 * tau * tau - j * tau**3 / 6.0
        else:
            d = tau - tau_r
            v = v_r - am * d
            x = x_r + v_r * d - 0.5 * am * d * d
        if v <= 0.0 and tau > 0.0:
            break
        samples.append((tau, max(v, 0.0), x))
        tau += h
    disc = a0 * a0 + 2.0 * j * v0
    tau_s = (a0 + math.sqrt(disc)) / j if disc > 0.0 else 0.0
    if tau_s <= tau_r or v_r <= 0.0:
        x_s = v0 * tau_s + 0.5 * a0 * tau_s * tau_s - j * tau_s**3 / 6.0
    else:
        tau_s = tau_r + v_r / am
        x_s = x_r + 0.5 * v_r * v_r / am
    samples.append((tau_s, 0.0, x_s))
    return samples


def stop_distance(v0: float, a0: float, limits: Limits) -> float:
    """Distance covered by the committed max-effort stop from (v0, a0)."""
    if v0 <= 0.0 and a0 <= 0.0:
        return 0.0
    j, am = limits.jerk_max, limits.a_max
    tau_r = max((a0 + am) / j, 0.0)
    v_r = v0 + a0 * tau_r - 0.5 * j * tau_r * tau_r
    disc = a0 * a0 + 2.0 * j * v0
    tau_s = (a0 + math.sqrt(disc)) / j if disc > 0.0 else 0.0
    if tau_s <= tau_r or v_r <= 0.0:
        return v0 * tau_s + 0.5 * a0 * tau_s * tau_s - j * tau_s**3 / 6.0
    x_r = v0 * tau_r + 0.5 * a0 * tau_r * tau_r - j * tau_r**3 / 6.0
    return x_r + 0.5 * v_r * v_r / am


def brake_reach(v0: float, a0: float, limits: Limits, margin: float) -> float:
    """Standoff a hazard point must keep ahead of state (v0, a0): room for
    the committed max-effort stop plus the standstill margin.

    Because the jerk-bounded stop is gradual, holding this standoff also
    keeps distance-over-speed to the point above two seconds throughout,
    so no separate time floor is needed on this branch.
    """
    return margin + stop_distance(v0, a0, limits)


def follow_reach(
    v0: float, a0: float, v_lead: float, dt: float, limits: Limits,
    ttc_floor: float, margin: float,
) -> float:
    """Headway a constant-speed leader must keep ahead of (v0, a0).

    Same committed-stop construction as brake_reach, evaluated in the
    leader frame: while still closing, the gap must cover ttc_floor
    times the closing speed plus the standstill margin.
    """
    reach = margin
    for tau, v, x in _commit_stop_profile(v0, a0, dt, limits):
        rel_x = x - v_lead * tau
        rel_v = v - v_lead
        reach = max(reach, rel_x + margin + ttc_floor * max(rel_v, 0.0))
    return reach


class _StepSolver:
    def __init__(
        self,
        views: list[PlayerView],
        dt: float,
        limits: Limits,
        sp: SolverParams,
        omega0: float,
        veh: VehicleParams,
        yaw_form: str,
        allow_reset: bool,
    ):
        self.views = views
        self.dt = dt
        self.limits = limits
        self.sp = sp
        self.omega0 = omega0
        self.veh = veh
        self.yaw_form = yaw_form
        self.allow_reset = allow_reset
        self.n = len(views)
        self.players = [i for i in range(self.n) if views[i].player]
        self.p = [v.p for v in views]
        self.balance = [balance_weights(v.kappa) for v in views]
        self.steer_lim = limits.steer_box(veh)
        self.evals = 0
        self.lateral_evals = 0
        self.sweeps = 0
        # cost side uses one gated crossing point: the one whose partner
        # arrives soonest at the step-start states.  Picking by own
        # distance instead would anchor the risk term to a conflict
        # already being won while the one actually being yielded to goes
        # unpriced.
        self.cost_cp: list[CpRef | None] = []
        for v in views:
            best: tuple[float, float, int] | None = None
            pick = None
            for c in v.cps:
                if not c.gated:
                    continue
                vo = views[c.partner]
                t_o = (c.s_other - vo.s) / vo.state.v_x if vo.state.v_x > 1e-9 else math.inf
                key = (t_o, c.s_self, c.partner)
                if best is None or key < best:
                    best, pick = key, c
            self.cost_cp.append(pick)
        # who else's loss moves when vehicle i moves
        self.dependents: list[list[int]] = [[] for _ in range(self.n)]
        for j in self.players:
            vj = views[j]
            if vj.lv is not None:
                self.dependents[vj.lv].append(j)
            cj = self.cost_cp[j]
            if cj is not None and cj.partner != vj.lv:
                self.dependents[cj.partner].append(j)
        self._reach_lat: list[dict[tuple[float, float], float]] = [{} for _ in range(self.n)]
        self._reach_lon: list[dict[tuple[float, float, float], float]] = [{} for _ in range(self.n)]
        self.controls: list[tuple[float, float]] = []
        for v in views:
            self.controls.append((v.a_prev, v.delta_prev) if v.player else v.coast)
        self.pred: list[VehicleState] = [None] * self.n  # type: ignore[list-item]
        self.pred_s: list[float] = [0.0] * self.n
        for i in range(self.n):
            self._refresh_pred(i)

    # -- prediction bookkeeping ------------------------------------------

    def _predict(self, i: int, a: float, d: float) -> VehicleState:
        return integrate(self.views[i].state, ControlInput(a, d), self.dt, self.veh, self.yaw_form)

    def _refresh_pred(self, i: int) -> None:
        a, d = self.controls[i]
        st = self._predict(i, a, d)
        self.pred[i] = st
        self.pred_s[i] = self.views[i].route.project(st.x, st.y)[0]

    # -- cost pieces ------------------------------------------------------

    def _own_terms(self, i: int, pred: VehicleState, s_pred: float, dy: float, dphi: float) -> CostTerms:
        view = self.views[i]
        k_s, k_e = self.balance[i]
        cp = self.cost_cp[i]
        omega_log = self.omega0 if (view.lv is not None and view.lv_gated) else 0.0
        omega_lat = self.omega0 if cp is not None else 0.0
        if view.lv is not None:
            lv_state = self.pred[view.lv]
            s_lv = view.route.project(lv_state.x, lv_state.y)[0]
            gap = max(s_lv - s_pred, GAP_FLOOR)
            v_log = following_risk(pred.v_x, lv_state.v_x, gap) if omega_log > 0.0 else 0.0
        else:
            gap = max(min(view.route.total_length - s_pred, FREE_GAP), 0.0)
            v_log = 0.0
        v_lat = 0.0
        if cp is not None:
            d_self = cp.s_self - s_pred
            d_other = cp.s_other - self.pred_s[cp.partner]
            if d_self > 0.0 and d_other > 0.0:
                v_lat = crossing_risk(d_self, pred.v_x, d_other, self.pred[cp.partner].v_x)
                self.lateral_evals += 1
        return CostTerms(v_log, v_lat, lane_keeping(dy, dphi), efficiency(gap, pred.v_x), omega_log, omega_lat, k_s, k_e)

    def _coupling(self, i: int, pred: VehicleState, s_pred: float) -> float:
        """Terms of other players' losses that move with vehicle i, weighted
        by p_i * p_j.  Constant terms are dropped; only differences matter."""
        p_i = self.p[i]
        if p_i == 0.0:
            return 0.0
        total = 0.0
        for j in self.dependents[i]:
            w = p_i * self.p[j]
            if w == 0.0:
                continue
            vj = self.views[j]
            k_s, k_e = self.balance[j]
            contrib = 0.0
            if vj.lv == i:
                s_i_on_j = vj.route.project(pred.x, pred.y)[0]
                gap = max(s_i_on_j - self.pred_s[j], GAP_FLOOR)
                if vj.lv_gated:
                    contrib += k_s * self.omega0 * following_risk(self.pred[j].v_x, pred.v_x, gap)
                contrib += k_e * efficiency(gap, self.pred[j].v_x)
            cj = self.cost_cp[j]
            if cj is not None and cj.partner == i:
                d_j = cj.s_self - self.pred_s[j]
                d_i = cj.s_other - s_pred
                if d_j > 0.0 and d_i > 0.0:
                    contrib += k_s * self.omega0 * crossing_risk(d_j, self.pred[j].v_x, d_i, pred.v_x)
                    self.lateral_evals += 1
            total += w * contrib
        return total

    # -- constraints ------------------------------------------------------

    def _reach_to_point(self, i: int, a: float, v_pred: float, margin: float) -> float:
        key = (a, margin)
        val = self._reach_lat[i].get(key)
        if val is None:
            val = brake_reach(v_pred, a, self.limits, margin)
            self._reach_lat[i][key] = val
        return val

    def _reach_to_leader(
        self, i: int, a: float, v_pred: float, v_lead: float, ttc_floor: float, margin: float
    ) -> float:
        key = (a, v_lead, ttc_floor)
        val = self._reach_lon[i].get(key)
        if val is None:
            val = follow_reach(v_pred, a, v_lead, self.dt, self.limits, ttc_floor, margin)
            self._reach_lon[i][key] = val
        return val

    def _constraint_residual(
        self, i: int, a: float, d: float, pred: VehicleState, s_pred: float,
        dy: float, dphi: float, guard: float,
    ) -> float:
        view = self.views[i]
        L = self.limits
        res = max(bound_residuals(a, d, view.a_prev, pred.v_x, dy, dphi, self.dt, L, self.steer_lim))
        ttc_floor = L.ttc_min + guard
        margin = L.stop_margin + guard
        if view.lv is not None:
            lv_state = self.pred[view.lv]
            gap = view.route.project(lv_state.x, lv_state.y)[0] - s_pred
            need = self._reach_to_leader(i, a, pred.v_x, lv_state.v_x, ttc_floor, margin)
            res = max(res, need - gap)
        for cp in view.cps:
            d_self = cp.s_self - s_pred
            if d_self <= 0.0:
                continue  # already past; liveness filtering retires it soon
            d_other = cp.s_other - self.pred_s[cp.partner]
            v_other = self.pred[cp.partner].v_x
            a_other = self.controls[cp.partner][0]
            t_self = d_self / pred.v_x if pred.v_x > 1e-9 else math.inf
            t_other = d_other / v_other if v_other > 1e-9 else math.inf
            # the pair is safe while any one of three escapes stays open:
            # this vehicle can still stop short of the point, the partner
            # can (under its announced control), or both are moving with
            # arrivals separated by the time floor.  Which escape a vehicle
            # ends up relying on is the game's decision, not a fixed rule;
            # priority emerges when one side lets its stopping option lapse
            # and the other is left with braking as its only branch.  The
            # partner term carries no guard: a partner holding at its own
            # guarded backoff must read as clear here.
            if math.isinf(t_self) or math.isinf(t_other):
                sep = math.inf  # a parked vehicle never crosses; no time claim
            else:
                sep = ttc_floor - abs(t_other - t_self)
            partner_hold = cp.hold_other + stop_distance(v_other, a_other, L) - d_other
            self_hold = self._reach_to_point(i, a, pred.v_x, cp.hold_self + guard) - d_self
            res = max(res, min(self_hold, partner_hold, sep))
        return res

    # -- candidate evaluation --------------------------------------------

    def _rank(self, i: int, a: float, d: float, objective: str):
        self.evals += 1
        pred = self._predict(i, a, d)
        view = self.views[i]
        s_pred, dy = view.route.project(pred.x, pred.y)
        dphi = wrap_angle(pred.phi + sideslip(d, self.veh) - view.route.tangent_at(s_pred))
        residual = self._constraint_residual(
            i, a, d, pred, s_pred, dy, dphi, self.limits.ttc_guard
        )
        if residual > self.sp.feas_slack:
            return (1.0, residual, abs(a), abs(d), a, d)
        terms = self._own_terms(i, pred, s_pred, dy, dphi)
        own = terms.total
        if objective == "solo":
            value = own
        else:
            p_i = self.p[i]
            value = (1.0 - p_i + p_i * p_i) * own + self._coupling(i, pred, s_pred)
        return (0.0, value, abs(a), abs(d), a, d)

    def _accel_box(self, i: int) -> tuple[float, float]:
        L = self.limits
        a_prev = self.views[i].a_prev
        slew = L.jerk_max * self.dt
        return max(-L.a_max, a_prev - slew), min(L.a_max, a_prev + slew)

    def _cap_candidate(self, i: int, a_lo: float, a_hi: float) -> float | None:
        """Largest in-box acceleration that keeps the speed ramp legal."""
        v0 = self.views[i].state.v_x
        L = self.limits

        def over(a: float) -> bool:
            return _ramp_peak_speed(v0 + a * self.dt, a, self.dt, L.jerk_max) > L.v_max

        if not over(a_hi) or over(a_lo):
            return None
        lo, hi = a_lo, a_hi
        for _ in range(48):
            mid = 0.5 * (lo + hi)
            if over(mid):
                hi = mid
            else:
                lo = mid
        return lo

    def _best_response(self, i: int, objective: str = "game") -> tuple[float, float, tuple, dict]:
        view = self.views[i]
        a_lo, a_hi = self._accel_box(i)
        d_lim = self.steer_lim
        memo: dict[tuple[float, float], tuple] = {}

        def ev(a: float, d: float):
            key = memo.get((a, d))
            if key is None:
                key = self._rank(i, a, d, objective)
                memo[(a, d)] = key
            return key

        seeds_a = [a_lo + k * (a_hi - a_lo) / 4.0 for k in range(5)]
        cap = self._cap_candidate(i, a_lo, a_hi)
        if cap is not None:
            seeds_a.append(cap)
        d_ff = tracking_delta(view.route, view.s, view.state.v_x, self.dt, self.limits, self.veh)
        seeds_d = [0.0, view.delta_prev, d_ff]
        for off in (math.radians(1.0), math.radians(3.0), math.radians(8.0)):
            seeds_d.append(d_ff + off)
            seeds_d.append(d_ff - off)
        seeds_d = sorted({min(max(d, -d_lim), d_lim) for d in seeds_d})

        best = None
        for a in seeds_a:
            for d in seeds_d:
                key = ev(a, d)
                if best is None or key < best[0]:
                    best = (key, a, d)
        assert best is not None
        _, ba, bd = best
        bkey = best[0]

        da, dd = 0.05, math.radians(1.0)
        moves = 0
        while (da > 2.5e-4 or dd > 5e-5) and moves < 200:
            cand = []
            for na, nd in (
                (ba + da, bd), (ba - da, bd), (ba, bd + dd), (ba, bd - dd),
                (ba + da, bd + dd), (ba + da, bd - dd), (ba - da, bd + dd), (ba - da, bd - dd),
            ):
                na = min(max(na, a_lo), a_hi)
                nd = min(max(nd, -d_lim), d_lim)
                if na == ba and nd == bd:
                    continue
                cand.append((ev(na, nd), na, nd))
            improved = min(cand) if cand else None
            if improved is not None and improved[0] < bkey:
                bkey, ba, bd = improved
                moves += 1
            else:
                da *= 0.5
                dd *= 0.5
        return ba, bd, bkey, memo

    # -- game rounds ------------------------------------------------------

    def _sweep_loop(self) -> list[bool]:
        feasible = [True] * self.n
        for _ in range(self.sp.max_sweeps):
            self.sweeps += 1
            worst = 0.0
            for i in self.players:
                a, d, key, _ = self._best_response(i)
                feasible[i] = key[0] == 0.0
                worst = max(worst, abs(a - self.controls[i][0]), abs(d - self.controls[i][1]))
                self.controls[i] = (a, d)
                self._refresh_pred(i)
            if worst < self.sp.conv_tol:
                break
        return feasible

    def solve(self) -> StepSolution:
        reset = [False] * self.n
        emergency = [False] * self.n
        feasible = self._sweep_loop()

        bad = [i for i in self.players if not feasible[i]]
        if bad:
            # leave the coalition and try once more before falling back
            for i in bad:
                if self.p[i] != 0.0:
                    self.p[i] = 0.0
                    reset[i] = True
            feasible = self._sweep_loop()
            for i in self.players:
                if not feasible[i]:
                    emergency[i] = True
                    d_em = tracking_delta(
                        self.views[i].route, self.views[i].s, self.views[i].state.v_x,
                        self.dt, self.limits, self.veh,
                    )
                    self.controls[i] = (-self.limits.a_max, d_em)
                    self._refresh_pred(i)

        rational, rat_res, solo = self._rationality()
        if self.allow_reset and not all(rational):
            for i in self.players:
                if not rational[i] and self.p[i] != 0.0:
                    self.p[i] = 0.0
                    reset[i] = True
            feasible = self._sweep_loop()
            for i in self.players:
                if not feasible[i] and not emergency[i]:
                    emergency[i] = True
                    d_em = tracking_delta(
                        self.views[i].route, self.views[i].s, self.views[i].state.v_x,
                        self.dt, self.limits, self.veh,
                    )
                    self.controls[i] = (-self.limits.a_max, d_em)
                    self._refresh_pred(i)
            rational, rat_res, solo = self._rationality()

        return self._bookkeeping(feasible, emergency, reset, rational, rat_res, solo)

    def _rationality(self) -> tuple[list[bool], list[float], list[float]]:
        """Compare each member's allocated loss against going it alone."""
        rational = [True] * self.n
        residual = [0.0] * self.n
        solo_v = [0.0] * self.n
        for i in self.players:
            if self.p[i] == 0.0:
                continue
            saved = self.controls[i]
            a, d, key, _ = self._best_response(i, objective="solo")
            self.controls[i] = saved
            self._refresh_pred(i)
            if key[0] != 0.0:
                continue  # no feasible lone move; nothing to compare against
            solo_v[i] = key[1]
            v_here = self._final_terms(i).total
            residual[i] = self.p[i] * (v_here - solo_v[i])
            rational[i] = residual[i] <= self.sp.rationality_tol
        return rational, residual, solo_v

    def _final_terms(self, i: int) -> CostTerms:
        pred = self.pred[i]
        view = self.views[i]
        s_pred, dy = view.route.project(pred.x, pred.y)
        dphi = wrap_angle(pred.phi + sideslip(self.controls[i][1], self.veh) - view.route.tangent_at(s_pred))
        return self._own_terms(i, pred, s_pred, dy, dphi)

    def _bookkeeping(self, feasible, emergency, reset, rational, rat_res, solo) -> StepSolution:
        n = self.n
        terms: list[CostTerms | None] = [None] * n
        v_total: list[float | None] = [None] * n
        j_value: list[float | None] = [None] * n
        h_alloc = [0.0] * n
        max_res = 0.0
        for i in self.players:
            t = self._final_terms(i)
            terms[i] = t
            v_total[i] = t.total
            h_alloc[i] = self.p[i] * t.total
            a, d = self.controls[i]
            pred = self.pred[i]
            s_pred, dy = self.views[i].route.project(pred.x, pred.y)
            dphi = wrap_angle(pred.phi + sideslip(d, self.veh) - self.views[i].route.tangent_at(s_pred))
            if not emergency[i]:
                max_res = max(
                    max_res,
                    self._constraint_residual(i, a, d, pred, s_pred, dy, dphi, 0.0),
                )
        v_sg = 0.0
        for i in self.players:
            v_sg += h_alloc[i]
        for i in self.players:
            p_i = self.p[i]
            j_value[i] = p_i * v_sg + (1.0 - p_i) * v_total[i]
        group = v_sg - sum(self.p[i] * solo[i] for i in self.players)
        return StepSolution(
            controls=list(self.controls),
            terms=terms,
            v_total=v_total,
            j_value=j_value,
            h_alloc=h_alloc,
            v_coalition=v_sg,
            p_used=list(self.p),
            rational=rational,
            rationality_residual=rat_res,
            group_residual=group,
            sweeps=self.sweeps,
            evals=self.evals,
            lateral_evals=self.lateral_evals,
            feasible=feasible,
            emergency=emergency,
            reset=reset,
            max_constraint_residual=max_res,
        )


def solve_step(
    views: list[PlayerView],
    dt: float,
    limits: Limits = Limits(),
    sp: SolverParams = SolverParams(),
    omega0: float = 10.0,
    veh: VehicleParams = DEFAULT_VEHICLE,
    yaw_form: str = "tan",
    allow_reset: bool = True,
) -> StepSolution:
    solver = _StepSolver(views, dt, limits, sp, omega0, veh, yaw_form, allow_reset)
    return solver.solve()
