"""Obstacle motion behaviors.

Each behavior mutates its obstacle's position in place once per tick and
stores the realized velocity (finite difference over dt) so privileged
time-to-collision rewards can read it. All random draws come from the
world's own generator, keeping runs reproducible per (seed, scenario).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .types import Obstacle, Rect, Vec2

if TYPE_CHECKING:
    from .world import WorldState


def _move_toward(ob: Obstacle, target: Vec2, speed: float, dt: float) -> None:
    """Advance toward target by speed*dt, landing exactly on arrival."""
    old = ob.position
    delta = target - old
    dist = delta.norm()
    step = speed * dt
    if dist <= step or dist == 0.0:
        new = target
    else:
        new = old + delta * (step / dist)
    ob.position = new
    ob.velocity = (new - old) * (1.0 / dt)


class Behavior:
    """Base class; static by default."""

    def step(self, ob: Obstacle, world: "WorldState") -> None:
        ob.velocity = Vec2(0.0, 0.0)


@dataclass
class Static(Behavior):
    pass


@dataclass
class SoftChase(Behavior):
    """Delayed pursuit: re-targets the robot only upon reaching its goal.

    The obstacle never chases continuously; when it arrives at its stored
    goal it samples a fresh speed and takes the robot's current position as
    the next goal.
    """

    speed_range: tuple[float, float] = (0.5, 2.0)
    arrival_tol: float = 0.2
    goal: Vec2 | None = None
    speed: float = 0.0

    def step(self, ob: Obstacle, world: "WorldState") -> None:
        if self.goal is None or (ob.position - self.goal).norm() <= self.arrival_tol:
            self.goal = world.robot.position
            lo, hi = self.speed_range
            self.speed = float(world.rng.uniform(lo, hi))
        _move_toward(ob, self.goal, self.speed, world.dt)


@dataclass
class RandomWaypoint(Behavior):
    """Wanders between uniformly sampled waypoints inside a region."""

    speed_range: tuple[float, float] = (0.4, 1.2)
    region: Rect | None = None  # defaults to world bounds
    arrival_tol: float = 0.1
    waypoint: Vec2 | None = None
    speed: float = 0.0

    def step(self, ob: Obstacle, world: "WorldState") -> None:
        region = self.region or world.bounds
        if self.waypoint is None or (ob.position - self.waypoint).norm() <= self.arrival_tol:
            self.waypoint = Vec2(
                float(world.rng.uniform(region.xmin, region.xmax)),
                float(world.rng.uniform(region.ymin, region.ymax)),
            )
            lo, hi = self.speed_range
            self.speed = float(world.rng.uniform(lo, hi))
        _move_toward(ob, self.waypoint, self.speed, world.dt)


@dataclass
class PeriodicBlocker(Behavior):
    """Oscillates between two endpoints with an exact period.

    Position is a triangle wave of elapsed time, so after one full period
    the obstacle returns to its starting pose up to float rounding.
    """

    p0: Vec2 = field(default_factory=lambda: Vec2(0.0, 0.0))
    p1: Vec2 = field(default_factory=lambda: Vec2(1.0, 0.0))
    period: float = 4.0
    start_tick: int | None = None

    def step(self, ob: Obstacle, world: "WorldState") -> None:
        if self.start_tick is None:
            self.start_tick = world.tick
        t = (world.tick + 1 - self.start_tick) * world.dt
        phase = math.fmod(t / self.period, 1.0)
        s = 2.0 * phase if phase <= 0.5 else 2.0 - 2.0 * phase
        old = ob.position
        new = self.p0 + (self.p1 - self.p0) * s
        ob.position = new
        ob.velocity = (new - old) * (1.0 / world.dt)


@dataclass
class CrossingPath(Behavior):
    """Ping-pongs along a line segment through an anchor point.

    The segment spans anchor +- span * direction, so the path always passes
    through the anchor (used by Hold scenarios, where the anchor is the
    robot's starting position).
    """

    anchor: Vec2 = field(default_factory=lambda: Vec2(0.0, 0.0))
    direction: Vec2 = field(default_factory=lambda: Vec2(1.0, 0.0))  # unit
    speed: float = 1.0
    span: float = 3.0
    offset: float = 0.0  # signed arclength from anchor, in [-span, span]
    forward: bool = True

    def step(self, ob: Obstacle, world: "WorldState") -> None:
        old = ob.position
        step = self.speed * world.dt
        s = self.offset + (step if self.forward else -step)
        if s > self.span:
            s = 2.0 * self.span - s
            self.forward = False
        elif s < -self.span:
            s = -2.0 * self.span - s
            self.forward = True
        self.offset = s
        new = self.anchor + self.direction * s
        ob.position = new
        ob.velocity = (new - old) * (1.0 / world.dt)


@dataclass
class HumanPuppet(Behavior):
    """Moves toward the latest externally supplied target under a speed cap.

    Used by the live session service for the draggable person obstacle.
    """

    speed_cap: float = 3.0
    target: Vec2 | None = None

    def step(self, ob: Obstacle, world: "WorldState") -> None:
        if self.target is None:
            ob.velocity = Vec2(0.0, 0.0)
            return
        _move_toward(ob, self.target, self.speed_cap, world.dt)


def step_obstacles(world: "WorldState") -> "WorldState":
    """Advance every obstacle one tick per its behavior. Mutates in place."""
    for ob in world.obstacles:
        if ob.behavior is None:
            ob.velocity = Vec2(0.0, 0.0)
        else:
            ob.behavior.step(ob, world)
    return world
