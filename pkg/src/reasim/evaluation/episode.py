"""Closed-loop episode execution for every system variant."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import rng as rng_mod
from ..core.collision import check_collision, wall_contact
from ..core.types import PlantConfig, Twist, Vec2
from ..core.world import step_world
from ..guidance.scenarios import GeneratedScenario
from ..raycast.api import ScanContext, depth_frame, ground_truth_rays
from ..raycast.frames import MAX_RANGE, FrameHistory, RayScan
from ..raycast.patterns import spherical_pattern
from ..rl.obs import assemble_obs_nav, assemble_obs_shield
from .variants import REA_COMMAND_SPEED, SystemVariant

SUCCESS_RADIUS = 0.5

OUTCOMES = ("success", "termination", "timeout")


@dataclass
class EpisodeRecord:
    outcome: str
    ticks: int
    min_obstacle_distance: float
    replay: list | None = None


class _EstimatorSensor:
    """Raw scans through the estimator; history pre-filled at reset."""

    def __init__(self, estimator, world, noise_rng, ray_noise: float):
        from ..estimator.collect import proprio_of

        self.est = estimator
        self.cfg = estimator.cfg
        self.pattern = spherical_pattern(self.cfg.n_elev, self.cfg.n_azim)
        self.noise_rng = noise_rng
        self.ray_noise = ray_noise
        self.history = FrameHistory(horizon=self.cfg.history, dt=world.dt)
        self._proprio_of = proprio_of
        frame = self._frame(world)
        proprio = proprio_of(world, noise_rng)
        for k in range(self.cfg.history):
            self.history.push(frame, proprio, (k - self.cfg.history) * world.dt)

    def _frame(self, world):
        return depth_frame(
            world,
            self.cfg.n_elev,
            self.cfg.n_azim,
            self.pattern,
            max_range=self.cfg.max_range,
            noise=self.ray_noise,
            rng=self.noise_rng,
        )

    def rays(self, world) -> RayScan:
        self.history.push(
            self._frame(world), self._proprio_of(world, self.noise_rng), world.time
        )
        depth, proprio = self.history.as_arrays()
        pred = self.est.predict(depth, proprio)[0]
        return RayScan(
            distances=np.asarray(pred, dtype=np.float64),
            heading=world.robot.heading,
            max_range=self.cfg.max_range,
        )


def _gt_sensor_rays(world, ctx, noise, rng) -> RayScan:
    scan = ground_truth_rays(world, ctx=ctx)
    if noise > 0:
        d = scan.distances + rng.uniform(-noise, noise, scan.distances.shape)
        scan.distances = np.clip(d, 1e-3, scan.max_range)
    return scan


def run_episode(
    variant: SystemVariant,
    gen: GeneratedScenario,
    seed: int,
    ray_noise: float = 0.05,
    hold_mode: bool = False,
    record_replay: bool = False,
) -> EpisodeRecord:
    """Run one scenario to success/termination/timeout.

    hold_mode feeds the shield a zero command and counts surviving the
    whole episode as success.
    """
    from ..nn.tensor import Tensor

    world = gen.world
    goal = gen.goal
    plant = PlantConfig()
    rng = rng_mod.stream(seed, "episode/noise")
    ctx = ScanContext(world)
    sensor = (
        _EstimatorSensor(variant.estimator, world, rng, ray_noise)
        if variant.estimator is not None
        else None
    )
    max_steps = int(gen.episode_length_s / world.dt)

    shield_state = variant.shield.init_state(1) if variant.shield else None
    nav_state = variant.nav.init_state(1) if variant.nav else None
    e2e_state = variant.end2end.init_state(1) if variant.end2end else None
    shield_prev = Twist.ZERO
    min_dist = math.inf
    replay = [] if record_replay else None

    for k in range(max_steps):
        rays = sensor.rays(world) if sensor else _gt_sensor_rays(world, ctx, ray_noise, rng)
        r = world.robot

        if variant.end2end is not None:
            obs = assemble_obs_nav(r.position, r.heading, r.body_velocity, goal, rays)
            mean, _, e2e_state, _ = variant.end2end.act(obs[None, :], e2e_state, rng=None)
            cmd_exec = Twist(*[float(v) for v in mean[0]])
            cmd_nav = cmd_exec
        else:
            if hold_mode:
                cmd_nav = Twist.ZERO
            elif variant.nav is not None:
                obs = assemble_obs_nav(r.position, r.heading, r.body_velocity, goal, rays)
                mean, _, nav_state, _ = variant.nav.act(obs[None, :], nav_state, rng=None)
                cmd_nav = Twist(*[float(v) for v in mean[0]])
            else:
                # shield-only goal seeking: unit direction toward the goal
                rel = (goal - r.position).rotated(-r.heading).unit()
                cmd_nav = Twist(
                    rel.x * REA_COMMAND_SPEED, rel.y * REA_COMMAND_SPEED, 0.0
                )
            sobs = assemble_obs_shield(cmd_nav, r.body_velocity, shield_prev, rays)
            mean, _, shield_state, _ = variant.shield.act(
                sobs[None, :], shield_state, rng=None
            )
            cmd_exec = Twist(*[float(v) for v in mean[0]])
            shield_prev = cmd_exec

        if record_replay:
            replay.append(
                {
                    "tick": world.tick,
                    "robot": [r.position.x, r.position.y, r.heading],
                    "cmd_nav": list(cmd_nav.as_tuple()),
                    "cmd_safe": list(cmd_exec.as_tuple()),
                }
            )

        step_world(world, cmd_exec, plant)
        if world.obstacles:
            from ..core.collision import distance_to_obstacle

            min_dist = min(
                min_dist,
                min(distance_to_obstacle(world.robot.position, ob) for ob in world.obstacles),
            )
        if check_collision(world) or wall_contact(world):
            return EpisodeRecord("termination", k + 1, min_dist, replay)
        if not hold_mode and goal is not None:
            if (goal - world.robot.position).norm() < SUCCESS_RADIUS:
                return EpisodeRecord("success", k + 1, min_dist, replay)

    return EpisodeRecord(
        "success" if hold_mode else "timeout", max_steps, min_dist, replay
    )
