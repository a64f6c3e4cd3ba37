"""World state container and deterministic stepping."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import rng as rng_mod
from .behaviors import step_obstacles
from .plant import step_plant
from .types import Obstacle, PlantConfig, Rect, RobotState, Twist


@dataclass
class WorldState:
    """Single source of truth for one simulated tick.

    Stepping order is fixed: obstacles advance first (so delayed-chase
    behaviors query the robot's pre-step position), then the robot, then
    the tick counter. Identical (seed, scenario, command sequence) yields
    an identical state sequence.
    """

    dt: float
    robot: RobotState
    obstacles: list[Obstacle]
    bounds: Rect
    seed: int
    rng_stream: str = "world"
    tick: int = 0
    rng: np.random.Generator = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.rng is None:
            self.rng = rng_mod.stream(self.seed, self.rng_stream)

    def obstacle_by_id(self, oid: int) -> Obstacle | None:
        for ob in self.obstacles:
            if ob.id == oid:
                return ob
        return None

    @property
    def time(self) -> float:
        return self.tick * self.dt


def step_world(world: WorldState, cmd: Twist, cfg: PlantConfig) -> WorldState:
    """Advance the world one tick under a robot velocity command."""
    step_obstacles(world)
    world.robot = step_plant(world.robot, cmd, cfg)
    world.tick += 1
    return world
