"""Participation, cost pooling, hard bounds, reachability, and the step solver."""

import math

import pytest
from hypothesis import given, strategies as st

from intersection_game.costs import balance_weights, efficiency, lane_keeping
from intersection_game.dynamics import (
    DEFAULT_VEHICLE,
    ControlInput,
    VehicleState,
    sideslip,
    step,
)
from intersection_game.game import (
    BOUND_NAMES,
    CpRef,
    Limits,
    PlayerView,
    SolverParams,
    _StepSolver,
    allocate,
    bound_residuals,
    brake_reach,
    closing_ttc,
    coalition_costs,
    follow_reach,
    participation,
    solve_step,
    stop_distance,
    tracking_delta,
)
from intersection_game.geometry import wrap_angle
from intersection_game.network import build_network, route_for

L = Limits()
NET = build_network()


def test_participation_values():
    assert participation(0.0) == 1.0
    assert participation(1.0) == pytest.approx(0.04321391826377226, abs=1e-12)
    assert participation(0.5) == participation(-0.5) == pytest.approx(
        0.45593812776599624, abs=1e-12
    )


def test_participation_rejects_out_of_range():
    with pytest.raises(ValueError):
        participation(1.5)
    with pytest.raises(ValueError):
        participation(-1.01)


def test_coalition_costs_splits():
    pooled, kept = coalition_costs((2.0, 4.0), (0.5, 0.25))
    assert pooled == pytest.approx(2.0)
    assert kept == pytest.approx([1.0, 3.0])
    pooled, kept = coalition_costs((2.0, 4.0), (0.0, 0.0))
    assert pooled == 0.0
    assert kept == [2.0, 4.0]
    pooled, kept = coalition_costs((2.0, 4.0), (1.0, 1.0))
    assert pooled == pytest.approx(6.0)
    assert kept == [0.0, 0.0]


def test_coalition_costs_rejects_length_mismatch():
    with pytest.raises(ValueError):
        coalition_costs((1.0, 2.0), (0.5,))


def test_allocate_example():
    assert allocate((2.0, 4.0), (0.5, 0.5)) == pytest.approx([1.0, 2.0])


@given(
    values=st.lists(st.floats(min_value=0.0, max_value=100.0), min_size=1, max_size=6),
    data=st.data(),
)
def test_allocation_sums_to_pool(values, data):
    p = data.draw(
        st.lists(
            st.floats(min_value=0.0, max_value=1.0),
            min_size=len(values), max_size=len(values),
        )
    )
    pooled, _ = coalition_costs(values, p)
    assert sum(allocate(values, p)) == pytest.approx(pooled, abs=1e-9)


def test_sideslip_bound_and_steer_box():
    assert L.beta_max() == pytest.approx(0.1652492162701235, abs=1e-12)
    box = L.steer_box(DEFAULT_VEHICLE)
    assert box <= L.delta_max
    # the box is exactly the steering that produces the sideslip bound
    assert sideslip(box) == pytest.approx(L.beta_max(), abs=1e-12)


def test_bound_residuals_all_slack_when_coasting():
    res = bound_residuals(0.0, 0.0, 0.0, 4.0, 0.0, 0.0, 0.1, L, L.steer_box(DEFAULT_VEHICLE))
    assert len(res) == len(BOUND_NAMES) == 6
    assert all(r <= 0.0 for r in res)


def test_bound_residuals_flag_each_limit():
    sb = L.steer_box(DEFAULT_VEHICLE)
    i_acc = BOUND_NAMES.index("accel")
    i_jerk = BOUND_NAMES.index("jerk")
    i_steer = BOUND_NAMES.index("steer")
    i_speed = BOUND_NAMES.index("speed")
    i_lane = BOUND_NAMES.index("lane")
    i_course = BOUND_NAMES.index("course")

    res = bound_residuals(9.0, 0.0, 9.0, 5.0, 0.0, 0.0, 0.1, L, sb)
    assert res[i_acc] == pytest.approx(1.0)
    res = bound_residuals(0.3, 0.0, 0.0, 5.0, 0.0, 0.0, 0.1, L, sb)
    assert res[i_jerk] == pytest.approx(1.0)
    res = bound_residuals(0.0, 0.4, 0.0, 5.0, 0.0, 0.0, 0.1, L, sb)
    assert res[i_steer] == pytest.approx(0.4 - sb)
    res = bound_residuals(0.0, 0.0, 0.0, 8.5, 0.0, 0.0, 0.1, L, sb)
    assert res[i_speed] == pytest.approx(0.5)
    res = bound_residuals(0.0, 0.0, 0.0, 5.0, 0.3, 0.0, 0.1, L, sb)
    assert res[i_lane] == pytest.approx(0.1)
    res = bound_residuals(0.0, 0.0, 0.0, 5.0, 0.0, math.radians(3.0), 0.1, L, sb)
    assert res[i_course] == pytest.approx(math.radians(1.0))


def test_speed_residual_guards_the_whole_ramp_down():
    # 7.9 m/s now, still pushing 1 m/s^2: the jerk-limited backout peaks at 8.1
    sb = L.steer_box(DEFAULT_VEHICLE)
    res = bound_residuals(1.0, 0.0, 1.0, 7.9, 0.0, 0.0, 0.1, L, sb)
    assert res[BOUND_NAMES.index("speed")] == pytest.approx(0.1, abs=1e-12)
    assert all(r <= 0.0 for k, r in enumerate(res) if k != BOUND_NAMES.index("speed"))


def test_closing_ttc_cases():
    assert closing_ttc(0.0, 0.0, 2.0, 0.0, 10.0, 0.0, 0.0, 0.0) == pytest.approx(5.0)
    assert closing_ttc(0.0, 0.0, 1.0, 0.0, 10.0, 0.0, 3.0, 0.0) == math.inf
    assert closing_ttc(1.0, 2.0, 1.0, 0.0, 1.0, 2.0, -1.0, 0.0) == 0.0


def test_stop_distance_values():
    assert stop_distance(0.0, 0.0, L) == 0.0
    assert stop_distance(5.5, 0.0, L) == pytest.approx(8.59909555967629, abs=1e-9)


@given(
    v0=st.floats(min_value=0.0, max_value=8.0),
    dv=st.floats(min_value=0.05, max_value=3.0),
    a0=st.floats(min_value=0.0, max_value=3.0),
    da=st.floats(min_value=0.05, max_value=2.0),
)
def test_stop_distance_monotone(v0, dv, a0, da):
    assert stop_distance(v0 + dv, a0, L) > stop_distance(v0, a0, L)
    assert stop_distance(v0, a0 + da, L) > stop_distance(v0, a0, L)


def test_brake_reach_is_margin_plus_stop():
    for v0, a0 in ((5.5, 0.0), (8.0, 1.0), (0.0, 0.0)):
        assert brake_reach(v0, a0, L, 3.5) == pytest.approx(3.5 + stop_distance(v0, a0, L))


def test_follow_reach_against_leader_speeds():
    # a parked leader needs at least the full braking room
    assert follow_reach(5.5, 0.0, 0.0, 0.1, L, 1.5, 3.5) >= brake_reach(5.5, 0.0, L, 3.5)
    # a faster leader never closes: only the standstill margin remains
    assert follow_reach(5.0, 0.0, 10.0, 0.1, L, 1.5, 3.5) == pytest.approx(3.5)


def test_tracking_delta_straight_and_arc():
    straight = route_for(NET, "M1", "straight", "outer")
    assert tracking_delta(straight, 20.0, 5.0, 0.1, L, DEFAULT_VEHICLE) == 0.0
    left = route_for(NET, "M1", "left")
    d = tracking_delta(left, 40.0, 0.0, 0.1, L, DEFAULT_VEHICLE)
    assert d == pytest.approx(math.atan(DEFAULT_VEHICLE.wheelbase / left.elements[1].radius))


def test_tracking_delta_clipped_by_steer_box():
    tight = build_network(right_turn_radius=7.0)
    r = route_for(tight, "M2", "right")
    arc_mid = 0.5 * (r.cum_s[1] + r.cum_s[2])
    d = tracking_delta(r, arc_mid, 0.0, 0.1, L, DEFAULT_VEHICLE)
    assert abs(d) == pytest.approx(L.steer_box(DEFAULT_VEHICLE))
    assert abs(math.atan(r.curvature_at(arc_mid) * DEFAULT_VEHICLE.wheelbase)) > abs(d)


def _single_view(v=5.0, s=20.0):
    route = route_for(NET, "M1", "straight", "outer")
    x, y = route.point_at(s)
    state = VehicleState(v, 0.0, x, y)
    return PlayerView(
        route=route, state=state, s=s, kappa=0.0, p=participation(0.0),
        a_prev=0.0, delta_prev=0.0, player=True, coast=(0.0, 0.0),
    )


def test_single_vehicle_accelerates_straight():
    sol = solve_step([_single_view()], 0.1)
    a, d = sol.controls[0]
    # jerk slew allows 0.2 at most and the headway cost rewards speed
    assert a == pytest.approx(0.2, abs=1e-9)
    assert d == pytest.approx(0.0, abs=1e-9)
    assert sol.feasible[0] and not sol.emergency[0] and not sol.reset[0]
    assert sol.rational[0]
    assert sol.max_constraint_residual <= 1e-6


def test_single_vehicle_matches_exhaustive_grid():
    view = _single_view()
    sol = solve_step([view], 0.1)
    sb = L.steer_box(DEFAULT_VEHICLE)
    k_s, k_e = balance_weights(0.0)
    best = math.inf
    for ia in range(-20, 21):
        a = 0.01 * ia
        for idg in range(-32, 33):
            d = sb * idg / 32.0
            pred = step(view.state, ControlInput(a, d), 0.1)
            s_pred, dy = view.route.project(pred.x, pred.y)
            dphi = wrap_angle(pred.phi + sideslip(d) - view.route.tangent_at(s_pred))
            if max(bound_residuals(a, d, 0.0, pred.v_x, dy, dphi, 0.1, L, sb)) > 1e-9:
                continue
            gap = max(min(view.route.total_length - s_pred, 50.0), 0.0)
            cost = k_s * lane_keeping(dy, dphi) + k_e * efficiency(gap, pred.v_x)
            best = min(best, cost)
    assert sol.v_total[0] == pytest.approx(best, abs=1e-9)


def _crossing_views():
    ra = route_for(NET, "M1", "straight", "outer")
    rb = route_for(NET, "M2", "straight", "outer")
    sa, sb_ = 26.0, 20.0
    cp_a = CpRef(partner=1, s_self=46.0, s_other=34.0, gated=True)
    cp_b = CpRef(partner=0, s_self=34.0, s_other=46.0, gated=True)
    va = PlayerView(
        route=ra, state=VehicleState(5.0, 0.0, *ra.point_at(sa)), s=sa,
        kappa=0.0, p=1.0, a_prev=0.0, delta_prev=0.0, player=True,
        coast=(0.0, 0.0), cps=(cp_a,),
    )
    vb = PlayerView(
        route=rb, state=VehicleState(4.0, 0.5 * math.pi, *rb.point_at(sb_)), s=sb_,
        kappa=0.0, p=1.0, a_prev=0.0, delta_prev=0.0, player=True,
        coast=(0.0, 0.0), cps=(cp_b,),
    )
    return [va, vb]


def test_crossing_pair_solves_cleanly():
    sol = solve_step(_crossing_views(), 0.1)
    assert sol.feasible == [True, True]
    assert sol.emergency == [False, False]
    assert sol.max_constraint_residual <= 1e-6
    assert sol.sweeps <= SolverParams().max_sweeps


def test_solved_controls_are_best_responses():
    solver = _StepSolver(
        _crossing_views(), 0.1, L, SolverParams(), 10.0, DEFAULT_VEHICLE, "tan", True
    )
    sol = solver.solve()
    for i in (0, 1):
        a_star, d_star = sol.controls[i]
        base = solver._rank(i, a_star, d_star, "game")
        assert base[0] == 0.0
        lo, hi = solver._accel_box(i)
        for da, dd in (
            (0.1, 0.0), (-0.1, 0.0), (0.0, math.radians(1.0)), (0.0, -math.radians(1.0)),
        ):
            a = min(max(a_star + da, lo), hi)
            d = min(max(d_star + dd, -solver.steer_lim), solver.steer_lim)
            if (a, d) == (a_star, d_star):
                continue
            key = solver._rank(i, a, d, "game")
            if key[0] == 0.0:
                assert key[1] >= base[1] - SolverParams().conv_tol


def test_pooled_loss_identities():
    sol = solve_step(_crossing_views(), 0.1)
    assert sum(sol.h_alloc) == pytest.approx(sol.v_coalition, abs=1e-9)
    for i in (0, 1):
        assert sol.h_alloc[i] == pytest.approx(sol.p_used[i] * sol.v_total[i], abs=1e-9)
        want = sol.p_used[i] * sol.v_coalition + (1.0 - sol.p_used[i]) * sol.v_total[i]
        assert sol.j_value[i] == pytest.approx(want, abs=1e-9)


def test_blocked_vehicle_falls_back_to_full_braking():
    route = route_for(NET, "M1", "straight", "outer")
    host = PlayerView(
        route=route, state=VehicleState(8.0, 0.0, *route.point_at(20.0)), s=20.0,
        kappa=0.0, p=1.0, a_prev=0.0, delta_prev=0.0, player=True,
        coast=(0.0, 0.0), lv=1, lv_gated=True,
    )
    parked = PlayerView(
        route=route, state=VehicleState(0.0, 0.0, *route.point_at(24.0)), s=24.0,
        kappa=0.0, p=0.0, a_prev=0.0, delta_prev=0.0, player=False,
        coast=(0.0, 0.0),
    )
    sol = solve_step([host, parked], 0.1)
    assert sol.feasible[0] is False
    assert sol.reset[0] is True
    assert sol.emergency[0] is True
    assert sol.controls[0] == (-L.a_max, 0.0)
    assert sol.controls[1] == (0.0, 0.0)
    assert sol.emergency[1] is False


def test_solve_step_deterministic():
    first = solve_step(_crossing_views(), 0.1)
    second = solve_step(_crossing_views(), 0.1)
    assert first.controls == second.controls
    assert first.v_coalition == second.v_coalition
    assert first.evals == second.evals
