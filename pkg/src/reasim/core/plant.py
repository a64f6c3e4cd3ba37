"""Kinematic velocity-tracking plant.

The body velocity tracks the clamped command through an exact first-order
lag discretization, v' = v + (target - v) * (1 - exp(-gain * dt)), with the
per-step change saturated by the acceleration limits. The pose is then
integrated over dt using the heading at the midpoint of the rotation.
"""

from __future__ import annotations

import math

from ..errors import InvalidInputError
from .types import PlantConfig, RobotState, Twist, Vec2, wrap_angle


def step_plant(state: RobotState, cmd: Twist, cfg: PlantConfig) -> RobotState:
    """Advance the robot one control period under a velocity command."""
    if not cmd.is_finite():
        raise InvalidInputError(f"non-finite command twist {cmd}")
    if cfg.dt <= 0:
        raise InvalidInputError(f"dt must be positive, got {cfg.dt}")

    target = cfg.clamp_twist(cmd)
    v = state.body_velocity
    new_axes = []
    for vi, ti, gain, amax in zip(
        v.as_tuple(), target.as_tuple(), cfg.tracking_gain, cfg.accel_limits
    ):
        dv = (ti - vi) * (1.0 - math.exp(-gain * cfg.dt))
        cap = amax * cfg.dt
        dv = min(max(dv, -cap), cap)
        new_axes.append(vi + dv)
    new_v = Twist(*new_axes)

    mid_heading = state.heading + 0.5 * new_v.wz * cfg.dt
    step_world = Vec2(new_v.vx, new_v.vy).rotated(mid_heading) * cfg.dt
    return RobotState(
        position=state.position + step_world,
        heading=wrap_angle(state.heading + new_v.wz * cfg.dt),
        body_velocity=new_v,
        radius=state.radius,
    )
