"""Gaussian risk field a vehicle projects along its predicted path.

The field ridge follows the rear-axle path under the currently applied
steering: a ray when driving straight, otherwise the circle the rear axle
is on.  Amplitude starts at its peak at the vehicle and decays
quadratically to zero at the prediction horizon; the cross-ridge profile
is Gaussian with a width that grows along the ridge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .dynamics import DEFAULT_VEHICLE, VehicleParams, VehicleState, path_curvature, rear_axle_and_turn_center


@dataclass(frozen=True)
class FieldParams:
    a0: float = 0.01  # base amplitude per squared meter of remaining horizon
    spread_b: float = 0.05  # width growth per meter of ridge
    spread_c: float = 0.5  # extra width growth per radian of steering
    horizon: float = 3.0  # prediction time, seconds
    threshold: float = 0.1  # field level that switches a risk weight on
    omega0: float = 10.0  # weight given to a switched-on risk term


@dataclass(frozen=True)
class GaussianField:
    """Frozen snapshot of one vehicle's field; value() evaluates it."""

    gx: float  # rear-axle anchor, ridge arc length zero
    gy: float
    heading: float
    curvature: float  # signed ridge curvature, zero for a straight ridge
    cx: float  # ridge circle center (unused when straight)
    cy: float
    peak: float  # amplitude coefficient, already scaled by aggressiveness
    support: float  # ridge length covered by the prediction horizon
    sigma0: float
    sigma_slope: float

    def ridge_arc_length(self, x: float, y: float) -> tuple[float, float]:
        """(s, lateral deviation) of a point relative to the ridge.

        s is measured in the travel direction and can exceed the support;
        points behind a straight ridge get negative s, points behind a
        curved one wrap to large positive s and fall off the support.
        """
        if self.curvature == 0.0:
            dx = x - self.gx
            dy = y - self.gy
            ct, st = math.cos(self.heading), math.sin(self.heading)
            return dx * ct + dy * st, abs(-st * dx + ct * dy)
        radius = 1.0 / abs(self.curvature)
        sign = 1.0 if self.curvature > 0.0 else -1.0
        ang = math.atan2(y - self.cy, x - self.cx)
        ang0 = math.atan2(self.gy - self.cy, self.gx - self.cx)
        d = math.fmod(sign * (ang - ang0), 2.0 * math.pi)
        if d < 0.0:
            d += 2.0 * math.pi
        return radius * d, abs(math.hypot(x - self.cx, y - self.cy) - radius)

    def value(self, x: float, y: float) -> float:
        if self.support <= 0.0 or self.peak <= 0.0:
            return 0.0
        s, r = self.ridge_arc_length(x, y)
        if s < 0.0 or s > self.support:
            return 0.0
        sigma = self.sigma0 + self.sigma_slope * s
        lam = self.peak * (s - self.support) ** 2
        return lam * math.exp(-r * r / (2.0 * sigma * sigma))

    def ridge_point(self, s: float) -> tuple[float, float]:
        if self.curvature == 0.0:
            return (self.gx + s * math.cos(self.heading), self.gy + s * math.sin(self.heading))
        radius = 1.0 / abs(self.curvature)
        sign = 1.0 if self.curvature > 0.0 else -1.0
        ang0 = math.atan2(self.gy - self.cy, self.gx - self.cx)
        ang = ang0 + sign * s / radius
        return (self.cx + radius * math.cos(ang), self.cy + radius * math.sin(ang))


def ridge_amplitude(s: float, v_x: float, kappa: float, horizon: float = 3.0, a0: float = 0.01) -> float:
    """Field strength on the ridge, peaking at the vehicle and falling
    quadratically to zero where the prediction horizon ends."""
    if not -1.0 <= kappa <= 1.0:
        raise ValueError(f"aggressiveness {kappa} outside [-1, 1]")
    return a0 * math.exp(kappa) * (s - max(v_x, 0.0) * horizon) ** 2


def ridge_sigma(s: float, delta_f: float, spread_b: float = 0.05, spread_c: float = 0.5, width: float = 1.8) -> float:
    """Cross-ridge spread s meters along the ridge under steering delta_f."""
    return width / 4.0 + (spread_b + spread_c * abs(delta_f)) * s


def gate_weight(levels, threshold: float, omega0: float) -> float:
    """omega0 when any level strictly exceeds the threshold, else zero."""
    return omega0 if any(g > threshold for g in levels) else 0.0


def turn_center_mirror(state: VehicleState, delta_f: float, params: VehicleParams = DEFAULT_VEHICLE):
    """Rear-axle point and the raw displaced center from the model equations.

    Kept as the documented primitive; the displacement there points away
    from the side the yaw rate sweeps toward, so the ridge construction
    reflects it through the rear axle.
    """
    return rear_axle_and_turn_center(state, delta_f, params)


def build_field(
    state: VehicleState,
    delta_f: float,
    kappa: float,
    fp: FieldParams = FieldParams(),
    veh: VehicleParams = DEFAULT_VEHICLE,
) -> GaussianField:
    """Field snapshot for a vehicle at `state` holding steering `delta_f`."""
    if not -1.0 <= kappa <= 1.0:
        raise ValueError(f"aggressiveness {kappa} outside [-1, 1]")
    (gx, gy), raw_center = turn_center_mirror(state, delta_f, veh)
    rho = path_curvature(delta_f, veh)
    if raw_center is None:
        rho = 0.0
        cx, cy = gx, gy
    else:
        # reflect so the center sits on the side the vehicle actually turns to
        cx, cy = 2.0 * gx - raw_center[0], 2.0 * gy - raw_center[1]
    return GaussianField(
        gx=gx,
        gy=gy,
        heading=state.phi,
        curvature=rho,
        cx=cx,
        cy=cy,
        peak=fp.a0 * math.exp(kappa),
        support=max(state.v_x, 0.0) * fp.horizon,
        sigma0=veh.width / 4.0,
        sigma_slope=fp.spread_b + fp.spread_c * abs(delta_f),
    )
