"""Exact disc-vs-primitive overlap tests.

Overlap is strict: touching boundaries (distance exactly equal to the sum
of radii, or the closest box point exactly on the disc rim) do not count
as collision.
"""

from __future__ import annotations

import math
from typing import TYPE_CHECKING

from .types import Box, Circle, Obstacle, Vec2

if TYPE_CHECKING:
    from .world import WorldState


def disc_overlaps_obstacle(center: Vec2, radius: float, ob: Obstacle) -> bool:
    if isinstance(ob.shape, Circle):
        d2 = (center - ob.position).dot(center - ob.position)
        rsum = radius + ob.shape.radius
        return d2 < rsum * rsum
    # oriented box: express the disc center in the box frame, clamp, compare
    local = (center - ob.position).rotated(-ob.angle)
    cx = min(max(local.x, -ob.shape.half_x), ob.shape.half_x)
    cy = min(max(local.y, -ob.shape.half_y), ob.shape.half_y)
    dx, dy = local.x - cx, local.y - cy
    return dx * dx + dy * dy < radius * radius


def check_collision(world: "WorldState") -> list[int]:
    """Ids of obstacles overlapping the robot disc, in obstacle order."""
    r = world.robot
    return [
        ob.id
        for ob in world.obstacles
        if disc_overlaps_obstacle(r.position, r.radius, ob)
    ]


def wall_contact(world: "WorldState") -> bool:
    """True when the robot disc touches or crosses the arena bounds."""
    r = world.robot
    b = world.bounds
    return (
        r.position.x - r.radius < b.xmin
        or r.position.x + r.radius > b.xmax
        or r.position.y - r.radius < b.ymin
        or r.position.y + r.radius > b.ymax
    )


def distance_to_obstacle(center: Vec2, ob: Obstacle) -> float:
    """Distance from a point to the obstacle footprint (0 inside)."""
    if isinstance(ob.shape, Circle):
        return max(0.0, (center - ob.position).norm() - ob.shape.radius)
    local = (center - ob.position).rotated(-ob.angle)
    dx = max(abs(local.x) - ob.shape.half_x, 0.0)
    dy = max(abs(local.y) - ob.shape.half_y, 0.0)
    return math.hypot(dx, dy)
