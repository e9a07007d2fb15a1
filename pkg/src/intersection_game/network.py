"""Intersection layout: approach roads, lane-level routes, conflict points.

Four orthogonal arms meet at a square conflict zone centered on the origin.
Inbound roads are named M1..M4 (from west, south, east, north); the matching
outbound roads are M1_out..M4_out.  Each road carries an inner and an outer
lane, offset to the right of the travel direction.  A route is an entry lane,
a maneuver (left / straight / right) and the implied exit lane, flattened to
a polyline of segments and circular arcs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .geometry import (
    Arc,
    Element,
    Segment,
    collinear_same_direction,
    element_crossings,
    segment_overlap,
    wrap_angle,
)

ARM_NAMES = ("M1", "M2", "M3", "M4")
MANEUVERS = ("left", "straight", "right")
LANES = ("inner", "outer")

# exit arm index shift per maneuver (left of M1 leaves through M4's arm, etc.)
_EXIT_SHIFT = {"left": -1, "straight": 2, "right": 1}

_DEDUP_TOL = 1e-6


class ZoneRole(Enum):
    """Position of a vehicle relative to the conflict zone."""

    RV = "RV"  # remote, still on the approach
    PV = "PV"  # inside the zone (plus a short tail past the far edge)
    OV = "OV"  # cleared the zone


class Relation(Enum):
    """Interaction type of another vehicle as seen from a host."""

    LV = "LV"  # leader on the host's own path
    NV = "NV"  # meets the host at a crossing or merge point ahead
    IV = "IV"  # no interaction


@dataclass(frozen=True)
class Road:
    """One directed road; anchors are where each lane centerline meets the
    conflict-zone edge."""

    name: str
    heading: float
    inbound: bool
    inner_anchor: tuple[float, float]
    outer_anchor: tuple[float, float]

    def anchor(self, lane: str) -> tuple[float, float]:
        if lane == "inner":
            return self.inner_anchor
        if lane == "outer":
            return self.outer_anchor
        raise ValueError(f"unknown lane: {lane!r}")


@dataclass(frozen=True)
class Network:
    cz_half_width: float
    lane_offset_inner: float
    lane_offset_outer: float
    approach_length: float
    exit_length: float
    right_turn_radius: float
    ov_exit_margin: float
    roads: dict[str, Road]

    @property
    def left_turn_radius(self) -> float:
        # tangent to the entry lane exactly at the zone edge
        return self.cz_half_width + self.lane_offset_inner


@dataclass(frozen=True)
class Route:
    name: str
    entry_road: str
    exit_road: str
    maneuver: str
    lane: str
    elements: tuple[Element, ...]
    cum_s: tuple[float, ...]
    total_length: float
    s_cz_entry: float
    s_cz_exit: float

    def _locate(self, s: float) -> tuple[int, float]:
        s = min(max(s, 0.0), self.total_length)
        for i in range(len(self.elements) - 1, -1, -1):
            if s >= self.cum_s[i]:
                return i, s - self.cum_s[i]
        return 0, 0.0

    def point_at(self, s: float) -> tuple[float, float]:
        i, ds = self._locate(s)
        return self.elements[i].point_at(ds)

    def tangent_at(self, s: float) -> float:
        i, ds = self._locate(s)
        return self.elements[i].tangent_at(ds)

    def curvature_at(self, s: float) -> float:
        i, ds = self._locate(s)
        return self.elements[i].curvature_at(ds)

    def project(self, x: float, y: float) -> tuple[float, float]:
        """(s, lateral distance) of the closest point on the route."""
        best: tuple[float, float] | None = None
        for i, el in enumerate(self.elements):
            s_loc, dist = el.project(x, y)
            cand = (dist, self.cum_s[i] + s_loc)
            if best is None or cand < best:
                best = cand
        assert best is not None
        return best[1], best[0]


@dataclass(frozen=True)
class Conflict:
    """Point where two routes interact.

    cross: transversal intersection; confluence: the downstream join point
    where one route merges onto the other's lane; following: start of the
    stretch the two routes share.
    """

    kind: str
    x: float
    y: float
    s_a: float
    s_b: float


def _arm_heading(index: int) -> float:
    return wrap_angle(0.5 * math.pi * index)


def build_network(
    cz_half_width: float = 10.0,
    lane_offset_inner: float = 2.0,
    lane_offset_outer: float = 6.0,
    approach_length: float = 30.0,
    exit_length: float = 30.0,
    right_turn_radius: float = 9.0,
    ov_exit_margin: float = 5.0,
) -> Network:
    if not 0.0 < lane_offset_inner < lane_offset_outer < cz_half_width:
        raise ValueError("need 0 < inner offset < outer offset < zone half width")
    if approach_length <= 0.0 or exit_length <= 0.0:
        raise ValueError("road lengths must be positive")
    if right_turn_radius <= 0.0:
        raise ValueError("right turn radius must be positive")
    # the right-turn arc must begin and end on the finite road segments
    reach = lane_offset_outer + right_turn_radius - cz_half_width
    if approach_length <= reach or exit_length <= reach:
        raise ValueError("right turn radius too large for the road lengths")

    roads: dict[str, Road] = {}
    h = cz_half_width
    for k, name in enumerate(ARM_NAMES):
        psi = _arm_heading(k)
        ux, uy = math.cos(psi), math.sin(psi)
        nx, ny = math.sin(psi), -math.cos(psi)  # unit normal to the right
        roads[name] = Road(
            name=name,
            heading=psi,
            inbound=True,
            inner_anchor=(-h * ux + lane_offset_inner * nx, -h * uy + lane_offset_inner * ny),
            outer_anchor=(-h * ux + lane_offset_outer * nx, -h * uy + lane_offset_outer * ny),
        )
        psi_out = wrap_angle(psi + math.pi)
        oux, ouy = math.cos(psi_out), math.sin(psi_out)
        onx, ony = math.sin(psi_out), -math.cos(psi_out)
        roads[name + "_out"] = Road(
            name=name + "_out",
            heading=psi_out,
            inbound=False,
            inner_anchor=(h * oux + lane_offset_inner * onx, h * ouy + lane_offset_inner * ony),
            outer_anchor=(h * oux + lane_offset_outer * onx, h * ouy + lane_offset_outer * ony),
        )
    return Network(
        cz_half_width=cz_half_width,
        lane_offset_inner=lane_offset_inner,
        lane_offset_outer=lane_offset_outer,
        approach_length=approach_length,
        exit_length=exit_length,
        right_turn_radius=right_turn_radius,
        ov_exit_margin=ov_exit_margin,
        roads=roads,
    )


def _boundary_segments(h: float) -> tuple[Segment, ...]:
    corners = [(h, h), (-h, h), (-h, -h), (h, -h)]
    segs = []
    for i in range(4):
        x0, y0 = corners[i]
        x1, y1 = corners[(i + 1) % 4]
        segs.append(Segment(x0, y0, math.atan2(y1 - y0, x1 - x0), math.hypot(x1 - x0, y1 - y0)))
    return tuple(segs)


def _zone_crossings(elements: tuple[Element, ...], cum_s: tuple[float, ...], h: float) -> list[float]:
    hits: list[float] = []
    for i, el in enumerate(elements):
        for bseg in _boundary_segments(h):
            for s_el, _ in element_crossings(el, bseg):
                hits.append(cum_s[i] + s_el)
    hits.sort()
    dedup: list[float] = []
    for s in hits:
        if not dedup or s - dedup[-1] > _DEDUP_TOL:
            dedup.append(s)
    return dedup


def route_for(net: Network, entry_road: str, maneuver: str, lane: str | None = None) -> Route:
    """Build the route from an inbound road through the zone to its exit lane."""
    if entry_road not in ARM_NAMES:
        raise ValueError(f"unknown entry road: {entry_road!r}")
    if maneuver not in MANEUVERS:
        raise ValueError(f"unknown maneuver: {maneuver!r}")
    if lane is None:
        lane = "inner" if maneuver == "left" else "outer"
    if lane not in LANES:
        raise ValueError(f"unknown lane: {lane!r}")
    if maneuver == "left" and lane != "inner":
        raise ValueError("left turns run from the inner lane")
    if maneuver == "right" and lane != "outer":
        raise ValueError("right turns run from the outer lane")

    k = ARM_NAMES.index(entry_road)
    exit_name = ARM_NAMES[(k + _EXIT_SHIFT[maneuver]) % 4] + "_out"
    entry = net.roads[entry_road]
    exit_ = net.roads[exit_name]
    ax, ay = entry.anchor(lane)
    ex, ey = exit_.anchor(lane)
    psi_in = entry.heading
    psi_out = exit_.heading
    u_in = (math.cos(psi_in), math.sin(psi_in))
    u_out = (math.cos(psi_out), math.sin(psi_out))
    p0 = (ax - net.approach_length * u_in[0], ay - net.approach_length * u_in[1])

    if maneuver == "straight":
        length = net.approach_length + 2.0 * net.cz_half_width + net.exit_length
        elements: tuple[Element, ...] = (Segment(p0[0], p0[1], psi_in, length),)
    else:
        radius = net.left_turn_radius if maneuver == "left" else net.right_turn_radius
        side = 1.0 if maneuver == "left" else -1.0
        m_in = (-u_in[1], u_in[0])
        m_out = (-u_out[1], u_out[0])
        # center sits at signed left distance side*radius from both lane lines
        c1 = side * radius + m_in[0] * ax + m_in[1] * ay
        c2 = side * radius + m_out[0] * ex + m_out[1] * ey
        det = m_in[0] * m_out[1] - m_in[1] * m_out[0]
        cx = (c1 * m_out[1] - c2 * m_in[1]) / det
        cy = (m_in[0] * c2 - m_out[0] * c1) / det
        t_in = (cx - side * radius * m_in[0], cy - side * radius * m_in[1])
        t_out = (cx - side * radius * m_out[0], cy - side * radius * m_out[1])
        approach_len = (t_in[0] - p0[0]) * u_in[0] + (t_in[1] - p0[1]) * u_in[1]
        sweep = wrap_angle(psi_out - psi_in)
        theta0 = math.atan2(t_in[1] - cy, t_in[0] - cx)
        arc = Arc(cx, cy, radius, theta0, sweep)
        end = (ex + net.exit_length * u_out[0], ey + net.exit_length * u_out[1])
        exit_len = (end[0] - t_out[0]) * u_out[0] + (end[1] - t_out[1]) * u_out[1]
        if approach_len <= 0.0 or exit_len <= 0.0:
            raise ValueError(f"turn arc does not fit the roads for {entry_road} {maneuver}")
        elements = (
            Segment(p0[0], p0[1], psi_in, approach_len),
            arc,
            Segment(t_out[0], t_out[1], psi_out, exit_len),
        )

    cum = [0.0]
    for el in elements[:-1]:
        cum.append(cum[-1] + el.length)
    total = cum[-1] + elements[-1].length
    crossings = _zone_crossings(elements, tuple(cum), net.cz_half_width)
    if len(crossings) < 2:
        raise ValueError(f"route {entry_road} {maneuver} does not traverse the zone")
    return Route(
        name=f"{entry_road}-{lane}-{maneuver}",
        entry_road=entry_road,
        exit_road=exit_name,
        maneuver=maneuver,
        lane=lane,
        elements=elements,
        cum_s=tuple(cum),
        total_length=total,
        s_cz_entry=crossings[0],
        s_cz_exit=crossings[-1],
    )


def standard_routes(net: Network) -> dict[str, Route]:
    """The sixteen lane-respecting routes, keyed by name."""
    out: dict[str, Route] = {}
    for arm in ARM_NAMES:
        for lane, maneuver in (
            ("inner", "left"),
            ("inner", "straight"),
            ("outer", "straight"),
            ("outer", "right"),
        ):
            r = route_for(net, arm, maneuver, lane)
            out[r.name] = r
    return out


def conflict_points(a: Route, b: Route) -> list[Conflict]:
    """All interaction points between two routes, sorted along route a."""
    out: list[Conflict] = []
    for i, ea in enumerate(a.elements):
        for j, eb in enumerate(b.elements):
            for s_ea, s_eb in element_crossings(ea, eb):
                x, y = ea.point_at(s_ea)
                out.append(Conflict("cross", x, y, a.cum_s[i] + s_ea, b.cum_s[j] + s_eb))

    # earliest stretch of shared lane, if any
    best: tuple[float, float, int, int, float, float] | None = None
    for i, ea in enumerate(a.elements):
        if not isinstance(ea, Segment):
            continue
        for j, eb in enumerate(b.elements):
            if not isinstance(eb, Segment) or not collinear_same_direction(ea, eb):
                continue
            ov = segment_overlap(ea, eb)
            if ov is None:
                continue
            s_a = a.cum_s[i] + ov[0]
            if best is None or s_a < best[0]:
                best = (s_a, b.cum_s[j] + ov[1], i, j, ov[0], ov[1])
    if best is not None:
        s_a, s_b, i, j, loc_a, loc_b = best
        x, y = a.elements[i].point_at(loc_a)
        # a route that reaches the shared lane through a turn creates a merge
        joins_mid_route = (loc_a <= _DEDUP_TOL and i > 0) or (loc_b <= _DEDUP_TOL and j > 0)
        if joins_mid_route:
            out.append(Conflict("confluence", x, y, s_a, s_b))
        out.append(Conflict("following", x, y, s_a, s_b))

    out.sort(key=lambda c: (c.s_a, c.kind, c.s_b))
    return out


def classify_zone_role(route: Route, s: float, net: Network) -> ZoneRole:
    if s < route.s_cz_entry:
        return ZoneRole.RV
    if s < route.s_cz_exit + net.ov_exit_margin:
        return ZoneRole.PV
    return ZoneRole.OV


def lead_distance_on_route(
    route: Route,
    host_s: float,
    x: float,
    y: float,
    heading: float,
    lateral_tol: float = 1.5,
    heading_tol: float = math.pi / 3.0,
) -> float | None:
    """Arc length of a vehicle at (x, y) along `route` when it drives the same
    lane ahead of host_s; None when it is off the lane, behind, or opposing."""
    s, dist = route.project(x, y)
    if dist > lateral_tol or s <= host_s + 1e-9:
        return None
    if abs(wrap_angle(heading - route.tangent_at(s))) > heading_tol:
        return None
    return s


def classify_relation(
    host_route: Route,
    host_s: float,
    other_route: Route,
    other_s: float,
    other_x: float,
    other_y: float,
    other_heading: float,
    conflicts: list[Conflict],
    pass_margin: float = 2.0,
) -> Relation:
    """Relation of the other vehicle to the host.

    `conflicts` must be conflict_points(host_route, other_route).  A point
    conflict stays live until each vehicle is pass_margin beyond it, so a
    pair is not declared clear while a body is still inside the crossing.
    """
    if lead_distance_on_route(host_route, host_s, other_x, other_y, other_heading) is not None:
        return Relation.LV
    for c in conflicts:
        if c.kind == "following":
            continue
        if host_s < c.s_a + pass_margin and other_s < c.s_b + pass_margin:
            return Relation.NV
    return Relation.IV
