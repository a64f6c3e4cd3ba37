"""Two-robot demo: independent stacks perceiving each other as obstacles.

Optional extra outside the acceptance battery. Each robot runs its own
nav -> shield -> plant pipeline; the other robot enters its raycasts as a
moving cylinder of the robot's footprint radius.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from ..core.collision import check_collision
from ..core.types import Circle, Obstacle, PlantConfig, RobotState, Twist, Vec2
from ..core.world import WorldState, step_world
from ..guidance.scenarios import GeneratedScenario
from ..raycast.api import ground_truth_rays
from ..rl.obs import assemble_obs_nav, assemble_obs_shield

ROBOT_OBSTACLE_HEIGHT = 0.6


@dataclass
class RobotStack:
    state: RobotState
    goal: Vec2
    nav: object
    shield: object
    nav_state: object = None
    shield_state: object = None
    shield_prev: Twist = Twist.ZERO

    def reset_states(self):
        self.nav_state = self.nav.init_state(1) if self.nav else None
        self.shield_state = self.shield.init_state(1)
        self.shield_prev = Twist.ZERO


def multi_robot_demo(
    gen: GeneratedScenario,
    starts_goals: list[tuple[Vec2, float, Vec2]],
    shield,
    nav,
    steps: int,
    ray_noise: float = 0.0,
    seed: int = 0,
) -> dict:
    """Run n robots in one arena; returns replay rows and separation trace."""
    from .. import rng as rng_mod
    from .variants import REA_COMMAND_SPEED

    plant = PlantConfig()
    rng = rng_mod.stream(seed, "multirobot/noise")
    robots = [
        RobotStack(
            state=RobotState(position=p, heading=h, body_velocity=Twist.ZERO),
            goal=g,
            nav=nav,
            shield=shield,
        )
        for p, h, g in starts_goals
    ]
    for r in robots:
        r.reset_states()
    base_obstacles = list(gen.world.obstacles)
    rows = []
    min_sep = math.inf

    for k in range(steps):
        cmds = []
        for i, rb in enumerate(robots):
            others = [
                Obstacle(
                    id=9000 + j,
                    shape=Circle(radius=robots[j].state.radius),
                    height=ROBOT_OBSTACLE_HEIGHT,
                    position=robots[j].state.position,
                    velocity=robots[j].state.world_velocity(),
                )
                for j in range(len(robots))
                if j != i
            ]
            view = WorldState(
                dt=gen.world.dt,
                robot=rb.state,
                obstacles=base_obstacles + others,
                bounds=gen.world.bounds,
                seed=seed,
            )
            rays = ground_truth_rays(view)
            if ray_noise > 0:
                d = rays.distances + rng.uniform(-ray_noise, ray_noise, rays.distances.shape)
                rays.distances = np.clip(d, 1e-3, rays.max_range)
            st = rb.state
            if rb.nav is not None:
                obs = assemble_obs_nav(st.position, st.heading, st.body_velocity, rb.goal, rays)
                mean, _, rb.nav_state, _ = rb.nav.act(obs[None, :], rb.nav_state, rng=None)
                cmd_nav = Twist(*[float(v) for v in mean[0]])
            else:
                rel = (rb.goal - st.position).rotated(-st.heading).unit()
                cmd_nav = Twist(rel.x * REA_COMMAND_SPEED, rel.y * REA_COMMAND_SPEED, 0.0)
            sobs = assemble_obs_shield(cmd_nav, st.body_velocity, rb.shield_prev, rays)
            mean, _, rb.shield_state, _ = rb.shield.act(sobs[None, :], rb.shield_state, rng=None)
            cmd_safe = Twist(*[float(v) for v in mean[0]])
            rb.shield_prev = cmd_safe
            cmds.append((cmd_nav, cmd_safe))

        from ..core.plant import step_plant

        for rb, (_, cmd_safe) in zip(robots, cmds):
            rb.state = step_plant(rb.state, cmd_safe, plant)

        sep = min(
            (
                (robots[i].state.position - robots[j].state.position).norm()
                for i in range(len(robots))
                for j in range(i + 1, len(robots))
            ),
            default=math.inf,
        )
        min_sep = min(min_sep, sep)
        rows.append(
            {
                "tick": k,
                "robots": [
                    {
                        "position": [rb.state.position.x, rb.state.position.y],
                        "heading": rb.state.heading,
                        "speed": rb.state.body_velocity.linear().norm(),
                        "cmd_nav": list(cn.as_tuple()),
                        "cmd_safe": list(cs.as_tuple()),
                    }
                    for rb, (cn, cs) in zip(robots, cmds)
                ],
                "separation": sep,
            }
        )
    return {"rows": rows, "min_separation": min_sep}
