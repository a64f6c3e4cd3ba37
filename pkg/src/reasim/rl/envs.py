"""Training environments.

Every reward term is scaled by dt, contact penalties included: shield and
end-to-end training episodes do not terminate on contact. Obstacles pass
through the disc while the -100/s penalty accumulates, and the arena
boundary clamps the pose (a pressed wall counts as contact every step).
Navigation training terminates on success (with a terminal bonus, since
truncating the reward stream would otherwise punish reaching the goal)
and on collision; evaluation episodes always end at the first contact,
matching the success/termination/timeout outcome partition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import rng as rng_mod
from ..core.behaviors import SoftChase
from ..core.collision import check_collision, wall_contact
from ..core.types import Circle, Obstacle, PlantConfig, Twist, Vec2
from ..core.world import step_world
from ..guidance.scenarios import ScenarioSpec, generate
from ..raycast.api import ScanContext, ground_truth_rays
from ..raycast.frames import RayScan
from ..rewards.kernels import (
    NavRewardInput,
    ShieldRewardInput,
    heuristic_avoid_velocity,
    nav_reward_terms,
    shield_reward_terms,
)
from .obs import assemble_obs_nav, assemble_obs_shield

SUCCESS_RADIUS = 0.5
NAV_SUCCESS_BONUS = 50.0
CMD_RESAMPLE_S = 4.0


def _noisy_scan(world, noise: float, rng: np.random.Generator, ctx=None) -> RayScan:
    scan = ground_truth_rays(world, ctx=ctx)
    if noise > 0:
        d = scan.distances + rng.uniform(-noise, noise, scan.distances.shape)
        scan.distances = np.clip(d, 1e-3, scan.max_range)
    return scan


def _sample_cmd_box(rng, limits=(2.5, 1.5, 3.0)) -> Twist:
    return Twist(
        float(rng.uniform(-limits[0], limits[0])),
        float(rng.uniform(-limits[1], limits[1])),
        float(rng.uniform(-limits[2], limits[2])),
    )


def clamp_to_bounds(world) -> bool:
    """Clamp the robot inside the arena; True when the wall was pressed."""
    r = world.robot
    b = world.bounds
    x = min(max(r.position.x, b.xmin + r.radius), b.xmax - r.radius)
    y = min(max(r.position.y, b.ymin + r.radius), b.ymax - r.radius)
    if x != r.position.x or y != r.position.y:
        r.position = Vec2(x, y)
        return True
    return False


@dataclass
class EpisodeResult:
    ep_return: float
    length: int
    collided: bool
    success: bool
    timeout: bool
    contact_steps: int = 0


class ShieldEnv:
    """Velocity-command tracking with obstacle avoidance rewards.

    Stage 1 holds only scattered static obstacles; stage 2 adds up to
    three delayed-chase obstacles. head_to_origin environments recompute
    the command every tick to point at the world origin, preventing the
    robot from simply outrunning the chasers.
    """

    n_extra = 9

    def __init__(
        self,
        index: int,
        seed: int,
        scale: str = "desk",
        stage: int = 1,
        head_to_origin: bool = False,
        heuristic_tracking: bool = False,
        ray_noise: float = 0.05,
    ):
        self.index = index
        self.seed = seed
        self.scale = scale
        self.stage = stage
        self.head_to_origin = head_to_origin
        self.heuristic_tracking = heuristic_tracking
        self.ray_noise = ray_noise
        self.plant = PlantConfig()
        self.rng = rng_mod.stream(seed, f"shield-env/{index}")
        self.episode = 0
        self.world = None

    def set_stage(self, stage: int) -> None:
        self.stage = stage

    def reset(self) -> np.ndarray:
        n_chasers = 0 if self.stage == 1 else int(self.rng.integers(1, 4))
        gen = generate(
            ScenarioSpec(
                kind="soft_chase",
                seed=self.seed * 1000003 + self.episode * 97 + self.index,
                scale=self.scale,
                params={"n_chasers": n_chasers},
            )
        )
        self.episode += 1
        self.world = gen.world
        self.max_steps = int(gen.episode_length_s / self.world.dt)
        self.k = 0
        self.ep_return = 0.0
        self.contact_steps = 0
        self.prev_actions = (Twist.ZERO, Twist.ZERO)
        self.origin_speed = float(self.rng.uniform(0.5, 2.0))
        self.cmd = self._next_cmd()
        self.scan_ctx = ScanContext(self.world)
        self.rays = _noisy_scan(self.world, self.ray_noise, self.rng, self.scan_ctx)
        return self._obs()

    def _next_cmd(self) -> Twist:
        if self.head_to_origin:
            rel = Vec2(0.0, 0.0) - self.world.robot.position
            base = rel.unit().rotated(-self.world.robot.heading) * self.origin_speed
            return self.plant.clamp_twist(Twist(base.x, base.y, 0.0))
        return _sample_cmd_box(self.rng)

    def _obs(self) -> np.ndarray:
        return assemble_obs_shield(
            self.cmd, self.world.robot.body_velocity, self.prev_actions[0], self.rays
        )

    def step(self, action: np.ndarray):
        a_t = Twist(float(action[0]), float(action[1]), float(action[2]))
        cmd = self.cmd
        rays_seen = self.rays
        track_target = (
            heuristic_avoid_velocity(rays_seen, cmd) if self.heuristic_tracking else cmd
        )
        heading_pre = self.world.robot.heading

        step_world(self.world, a_t, self.plant)
        self.k += 1
        hit_wall = clamp_to_bounds(self.world)
        collisions = check_collision(self.world)
        self.rays = _noisy_scan(self.world, self.ray_noise, self.rng, self.scan_ctx)

        contacts = len(collisions) + (1 if hit_wall else 0)
        inp = ShieldRewardInput(
            cmd=track_target,
            actual=self.world.robot.body_velocity,
            actions=(a_t, self.prev_actions[0], self.prev_actions[1]),
            rays=self.rays,
            robot_velocity_world=self.world.robot.world_velocity(),
            cmd_velocity_world=cmd.linear().rotated(heading_pre),
            collisions=contacts,
            dt=self.world.dt,
        )
        terms = shield_reward_terms(inp)
        reward = self.world.dt * sum(terms.values())

        self.contact_steps += contacts
        timeout = self.k >= self.max_steps
        done = timeout
        self.ep_return += reward
        self.prev_actions = (a_t, self.prev_actions[0])
        if self.head_to_origin or self.k % int(CMD_RESAMPLE_S / self.world.dt) == 0:
            self.cmd = self._next_cmd()
        info = {"terms": terms, "timeout": timeout}
        if done:
            info["episode"] = EpisodeResult(
                self.ep_return,
                self.k,
                self.contact_steps > 0,
                self.contact_steps == 0,
                timeout,
                self.contact_steps,
            )
        return self._obs(), reward, done, info


class NavEnv:
    """Goal reaching through a frozen safety shield.

    The navigation action feeds the shield, whose mean action drives the
    plant. Rewards follow the guidance field sampled where the command was
    issued; success terminates inside 0.5 m with a terminal bonus.
    """

    n_extra = 6

    def __init__(
        self,
        index: int,
        seed: int,
        shield,
        kind: str = "scatter",
        scale: str = "desk",
        level: int = 0,
        ray_noise: float = 0.05,
        success_bonus: float = NAV_SUCCESS_BONUS,
    ):
        self.index = index
        self.seed = seed
        self.shield = shield
        self.kind = kind
        self.scale = scale
        self.level = level
        self.ray_noise = ray_noise
        self.success_bonus = success_bonus
        self.plant = PlantConfig()
        self.rng = rng_mod.stream(seed, f"nav-env/{index}")
        self.episode = 0

    def set_level(self, level: int) -> None:
        self.level = level

    def reset(self) -> np.ndarray:
        params = {"n_dynamic": self.level} if self.kind == "scatter" else {}
        gen = generate(
            ScenarioSpec(
                kind=self.kind,
                seed=self.seed * 1000003 + self.episode * 89 + self.index,
                scale=self.scale,
                params=params,
            )
        )
        self.episode += 1
        self.world = gen.world
        self.goal = gen.goal
        self.field = gen.field
        self.max_steps = int(gen.episode_length_s / self.world.dt)
        self.k = 0
        self.ep_return = 0.0
        self.shield_state = self.shield.init_state(1)
        self.shield_prev = Twist.ZERO
        self.d_prv = (self.goal - self.world.robot.position).norm()
        self.scan_ctx = ScanContext(self.world)
        self.rays = _noisy_scan(self.world, self.ray_noise, self.rng, self.scan_ctx)
        return self._obs()

    def _obs(self) -> np.ndarray:
        r = self.world.robot
        return assemble_obs_nav(r.position, r.heading, r.body_velocity, self.goal, self.rays)

    def shield_obs(self, cmd: Twist) -> np.ndarray:
        """Shield observation for the current tick (batched by NavVecEnv)."""
        return assemble_obs_shield(
            cmd, self.world.robot.body_velocity, self.shield_prev, self.rays
        )

    def shield_pass(self, cmd: Twist) -> Twist:
        """Run the frozen shield on the current exteroception (single env)."""
        mean, _, self.shield_state, _ = self.shield.act(
            self.shield_obs(cmd)[None, :], self.shield_state, rng=None
        )
        safe = Twist(float(mean[0, 0]), float(mean[0, 1]), float(mean[0, 2]))
        self.shield_prev = safe
        return safe

    def step(self, action: np.ndarray):
        a_nav = Twist(float(action[0]), float(action[1]), float(action[2]))
        cmd_safe = self.shield_pass(a_nav)
        return self.apply_safe(a_nav, cmd_safe)

    def apply_safe(self, a_nav: Twist, cmd_safe: Twist):
        """Advance the world under an already-computed safe command."""
        heading_pre = self.world.robot.heading
        pos_pre = self.world.robot.position
        u_guide = self.field.sample(pos_pre)

        step_world(self.world, cmd_safe, self.plant)
        self.k += 1
        collided = bool(check_collision(self.world)) or wall_contact(self.world)
        self.rays = _noisy_scan(self.world, self.ray_noise, self.rng, self.scan_ctx)

        d = (self.goal - self.world.robot.position).norm()
        v_cmd_world = a_nav.linear().rotated(heading_pre)
        inp = NavRewardInput(
            d=d,
            d_prv=self.d_prv,
            cmd_direction=v_cmd_world.unit() if v_cmd_world.norm() >= 1e-3 else Vec2(0, 0),
            u_guide=u_guide,
            t_rest=(self.max_steps - self.k) * self.world.dt,
        )
        terms = nav_reward_terms(inp, a_nav)
        reward = self.world.dt * sum(terms.values())

        success = d < SUCCESS_RADIUS
        timeout = self.k >= self.max_steps and not (success or collided)
        if success:
            reward += self.success_bonus
        done = success or collided or timeout
        self.ep_return += reward
        self.d_prv = d
        info = {"terms": terms, "timeout": timeout, "cmd_safe": cmd_safe}
        if done:
            info["episode"] = EpisodeResult(self.ep_return, self.k, collided, success, timeout)
        return self._obs(), reward, done, info


class End2EndEnv:
    """Monolithic goal-reaching baseline: nav observation straight to plant.

    Uses the shield curriculum's terrain stages (static scatter, then
    added delayed chasers) with the navigation reward set plus collision
    and smoothness terms.
    """

    n_extra = 6

    def __init__(
        self,
        index: int,
        seed: int,
        scale: str = "desk",
        stage: int = 1,
        ray_noise: float = 0.05,
        success_bonus: float = NAV_SUCCESS_BONUS,
    ):
        self.index = index
        self.seed = seed
        self.scale = scale
        self.stage = stage
        self.ray_noise = ray_noise
        self.success_bonus = success_bonus
        self.plant = PlantConfig()
        self.rng = rng_mod.stream(seed, f"e2e-env/{index}")
        self.episode = 0

    def set_stage(self, stage: int) -> None:
        self.stage = stage

    def reset(self) -> np.ndarray:
        gen = generate(
            ScenarioSpec(
                kind="scatter",
                seed=self.seed * 1000003 + self.episode * 83 + self.index,
                scale=self.scale,
            )
        )
        self.episode += 1
        self.world = gen.world
        self.goal = gen.goal
        self.field = gen.field
        if self.stage >= 2:
            self._add_chasers(int(self.rng.integers(1, 4)))
        self.max_steps = int(gen.episode_length_s / self.world.dt)
        self.k = 0
        self.ep_return = 0.0
        self.contact_steps = 0
        self.prev_actions = (Twist.ZERO, Twist.ZERO)
        self.d_prv = (self.goal - self.world.robot.position).norm()
        self.scan_ctx = ScanContext(self.world)
        self.rays = _noisy_scan(self.world, self.ray_noise, self.rng, self.scan_ctx)
        return self._obs()

    def _add_chasers(self, n: int) -> None:
        from ..guidance.scenarios import _free_spawn

        for k in range(n):
            pos = _free_spawn(
                self.rng, self.world.bounds, self.world.obstacles,
                self.world.robot.position, min_start_dist=2.5,
            )
            if pos is None:
                continue
            self.world.obstacles.append(
                Obstacle(
                    id=7000 + k,
                    shape=Circle(radius=0.3),
                    height=float(self.rng.uniform(0.9, 1.7)),
                    position=pos,
                    behavior=SoftChase(speed_range=(0.5, 1.6)),
                )
            )

    def _obs(self) -> np.ndarray:
        r = self.world.robot
        return assemble_obs_nav(r.position, r.heading, r.body_velocity, self.goal, self.rays)

    def step(self, action: np.ndarray):
        a_t = Twist(float(action[0]), float(action[1]), float(action[2]))
        heading_pre = self.world.robot.heading
        u_guide = self.field.sample(self.world.robot.position)

        step_world(self.world, a_t, self.plant)
        self.k += 1
        hit_wall = clamp_to_bounds(self.world)
        n_coll = len(check_collision(self.world)) + (1 if hit_wall else 0)
        self.rays = _noisy_scan(self.world, self.ray_noise, self.rng, self.scan_ctx)

        d = (self.goal - self.world.robot.position).norm()
        v_cmd_world = a_t.linear().rotated(heading_pre)
        inp = NavRewardInput(
            d=d,
            d_prv=self.d_prv,
            cmd_direction=v_cmd_world.unit() if v_cmd_world.norm() >= 1e-3 else Vec2(0, 0),
            u_guide=u_guide,
            t_rest=(self.max_steps - self.k) * self.world.dt,
        )
        terms = nav_reward_terms(inp, a_t)
        from ..rewards.kernels import r_smooth

        reward = self.world.dt * (
            sum(terms.values())
            + r_smooth(a_t, self.prev_actions[0], self.prev_actions[1])
            - 100.0 * n_coll
        )

        self.contact_steps += n_coll
        success = d < SUCCESS_RADIUS
        timeout = self.k >= self.max_steps and not success
        if success:
            reward += self.success_bonus
        done = success or timeout
        self.ep_return += reward
        self.d_prv = d
        self.prev_actions = (a_t, self.prev_actions[0])
        info = {"terms": terms, "timeout": timeout}
        if done:
            info["episode"] = EpisodeResult(
                self.ep_return, self.k, self.contact_steps > 0,
                success and self.contact_steps == 0, timeout, self.contact_steps,
            )
        return self._obs(), reward, done, info


class VecEnv:
    """Sequential vector wrapper with auto-reset.

    On done, info carries the terminal observation so timeout bootstrap
    values can be computed before the reset observation replaces it.
    """

    def __init__(self, envs: list):
        self.envs = envs

    def __len__(self) -> int:
        return len(self.envs)

    @property
    def obs_dim(self) -> int:
        return self.envs[0].n_extra + 180

    def reset_all(self) -> np.ndarray:
        return np.stack([e.reset() for e in self.envs])

    def step(self, actions: np.ndarray):
        obs, rewards, dones, infos = [], [], [], []
        for env, a in zip(self.envs, actions):
            o, r, d, inf = env.step(a)
            if d:
                inf["terminal_obs"] = o
                o = env.reset()
            obs.append(o)
            rewards.append(r)
            dones.append(d)
            infos.append(inf)
        return (
            np.stack(obs),
            np.array(rewards),
            np.array(dones, dtype=np.float64),
            infos,
        )


class NavVecEnv(VecEnv):
    """Vector wrapper that batches the frozen shield pass across envs.

    Keeps one shield LSTM state row per environment and zeroes it on
    reset, exactly as the single-env path would.
    """

    def __init__(self, envs: list, shield):
        super().__init__(envs)
        self.shield = shield
        self._h = None
        self._c = None

    def reset_all(self) -> np.ndarray:
        obs = super().reset_all()
        hidden = self.shield.cfg.hidden
        self._h = np.zeros((len(self.envs), hidden), dtype=np.float32)
        self._c = np.zeros((len(self.envs), hidden), dtype=np.float32)
        return obs

    def step(self, actions: np.ndarray):
        from ..nn.tensor import Tensor

        twists = [Twist(float(a[0]), float(a[1]), float(a[2])) for a in actions]
        sobs = np.stack([env.shield_obs(t) for env, t in zip(self.envs, twists)])
        mean, _, state, _ = self.shield.act(sobs, (Tensor(self._h), Tensor(self._c)), rng=None)
        self._h, self._c = state[0].data.copy(), state[1].data.copy()

        obs, rewards, dones, infos = [], [], [], []
        for i, (env, a_nav) in enumerate(zip(self.envs, twists)):
            safe = Twist(float(mean[i, 0]), float(mean[i, 1]), float(mean[i, 2]))
            env.shield_prev = safe
            o, r, d, inf = env.apply_safe(a_nav, safe)
            if d:
                inf["terminal_obs"] = o
                o = env.reset()
                self._h[i] = 0.0
                self._c[i] = 0.0
            obs.append(o)
            rewards.append(r)
            dones.append(d)
            infos.append(inf)
        return (
            np.stack(obs),
            np.array(rewards),
            np.array(dones, dtype=np.float64),
            infos,
        )
