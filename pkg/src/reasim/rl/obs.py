"""Observation assembly for the shield and navigation policies."""

from __future__ import annotations

import numpy as np

from ..core.types import Twist, Vec2
from ..raycast.frames import RayScan

SHIELD_EXTRA = 9  # cmd(3) + body velocity(3) + previous action(3)
NAV_EXTRA = 6  # goal in base frame(2) + distance(1) + body velocity(3)
GOAL_CLIP = 10.0


def assemble_obs_shield(
    cmd: Twist, body_velocity: Twist, prev_action: Twist, rays: RayScan
) -> np.ndarray:
    """[cmd, body velocity, previous action, rays normalized by max range]."""
    return np.concatenate(
        [
            np.array(cmd.as_tuple()),
            np.array(body_velocity.as_tuple()),
            np.array(prev_action.as_tuple()),
            rays.normalized(),
        ]
    )


def assemble_obs_nav(
    position: Vec2, heading: float, body_velocity: Twist, goal: Vec2, rays: RayScan
) -> np.ndarray:
    """[goal in base frame clipped to 10 m, goal distance, body velocity, rays]."""
    rel = goal - position
    d = rel.norm()
    base = rel.rotated(-heading)
    if d > GOAL_CLIP:
        base = base * (GOAL_CLIP / d)
    return np.concatenate(
        [
            np.array([base.x, base.y, d]),
            np.array(body_velocity.as_tuple()),
            rays.normalized(),
        ]
    )
