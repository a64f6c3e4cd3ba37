"""Rollout data collection for supervised estimator training.

Episodes run the safety-shield controller while tracking random velocity
commands; the navigation policy is never in the loop, so the estimator
stays free of goal-reaching bias. Every post-warm-up tick contributes one
(depth history, proprio history, ground-truth rays) sample.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .. import rng as rng_mod
from ..core.types import PlantConfig, Twist, Vec2
from ..core.world import step_world
from ..guidance.scenarios import ScenarioSpec, generate
from ..raycast.api import depth_frame, ground_truth_rays
from ..raycast.dataset_io import DatasetWriter
from ..raycast.frames import FrameHistory
from ..raycast.patterns import spherical_pattern
from .model import EstimatorConfig

# controller(cmd, world) -> executed Twist; None tracks the command directly
Controller = Callable[[Twist, "object"], Twist]


def sample_cmd(rng: np.random.Generator, limits=(2.5, 1.5, 3.0)) -> Twist:
    return Twist(
        float(rng.uniform(-limits[0], limits[0])),
        float(rng.uniform(-limits[1], limits[1])),
        float(rng.uniform(-limits[2], limits[2])),
    )


def proprio_of(world, rng: np.random.Generator, gravity_noise: float = 0.01) -> np.ndarray:
    g = np.array([0.0, 0.0, -1.0]) + rng.uniform(-gravity_noise, gravity_noise, 3)
    g /= np.linalg.norm(g)
    return np.array([g[0], g[1], g[2], 0.0, 0.0, world.robot.body_velocity.wz])


def data_collect(
    out_path: str,
    count: int,
    cfg: EstimatorConfig,
    seed: int,
    controller: Controller | None = None,
    scenario_kind: str = "soft_chase",
    scale: str = "desk",
    scenario_params: dict | None = None,
    ray_noise: float = 0.05,
    resample_cmd_s: float = 4.0,
) -> int:
    """Write exactly count samples; returns the number written."""
    plant = PlantConfig()
    pattern = spherical_pattern(cfg.n_elev, cfg.n_azim)
    cmd_rng = rng_mod.stream(seed, "collect/cmd")
    noise_rng = rng_mod.stream(seed, "collect/noise")
    params = dict(scenario_params or {})
    if scenario_kind == "soft_chase" and "n_chasers" not in params:
        params["n_chasers"] = 2

    written = 0
    episode = 0
    writer = DatasetWriter(out_path, cfg.n_elev, cfg.n_azim, cfg.history, cfg.n_azim)
    try:
        while written < count:
            gen = generate(
                ScenarioSpec(
                    kind=scenario_kind,
                    seed=seed * 100003 + episode,
                    scale=scale,
                    params=params,
                )
            )
            world = gen.world
            history = FrameHistory(horizon=cfg.history, dt=world.dt)
            steps = int(gen.episode_length_s / world.dt)
            cmd = sample_cmd(cmd_rng)
            resample_every = max(1, int(resample_cmd_s / world.dt))
            for k in range(steps):
                if k and k % resample_every == 0:
                    cmd = sample_cmd(cmd_rng)
                frame = depth_frame(
                    world, cfg.n_elev, cfg.n_azim, pattern,
                    max_range=cfg.max_range, noise=ray_noise, rng=noise_rng,
                )
                history.push(frame, proprio_of(world, noise_rng), world.time)
                if history.warmed_up:
                    depth, proprio = history.as_arrays()
                    label = ground_truth_rays(
                        world, n_rays=cfg.n_azim, max_range=cfg.max_range
                    ).distances
                    writer.add(
                        depth.astype(np.float32),
                        proprio.astype(np.float32),
                        label.astype(np.float32),
                    )
                    written += 1
                    if written >= count:
                        break
                executed = cmd if controller is None else controller(cmd, world)
                step_world(world, executed, plant)
            episode += 1
    finally:
        writer.close()
    return written
