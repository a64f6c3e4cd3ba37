"""Reward and penalty kernels plus the time-to-collision primitive.

All kernels are pure functions of their inputs. Direction unit vectors
are defined as zero when the corresponding speed is below 1e-3 m/s, and
indicator dot products evaluate literally against those zeros, which
avoids NaNs from normalizing near-zero vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core.types import PlantConfig, Twist, Vec2
from ..raycast.frames import RayScan

TTC_CAP = 10.0
SPEED_EPS = 1e-3
CLOSING_EPS = 1e-6

VEL_LIMITS = (2.5, 1.5, 3.0)


@dataclass
class ShieldRewardInput:
    """Everything the shield reward terms read at one tick.

    Action history is ordered newest first: a_t, a_{t-1}, a_{t-2}.
    Velocities are world-frame for the TTC terms.
    """

    cmd: Twist
    actual: Twist
    actions: tuple[Twist, Twist, Twist]
    rays: RayScan
    robot_velocity_world: Vec2
    cmd_velocity_world: Vec2
    collisions: int
    dt: float = 0.02


@dataclass
class NavRewardInput:
    d: float
    d_prv: float
    cmd_direction: Vec2  # unit, or zero when the command speed is tiny
    u_guide: Vec2  # unit, or zero at goal/unreachable cells
    t_rest: float


def _unit_or_zero(v: Vec2) -> Vec2:
    return v.unit() if v.norm() >= SPEED_EPS else Vec2(0.0, 0.0)


def ttc(
    ray_distance: float,
    ray_dir: Vec2,
    robot_v: Vec2,
    obstacle_v: Vec2,
    cap: float = TTC_CAP,
) -> float:
    """Time to collision along one ray: r / ((v - v_obs) . u).

    Non-closing geometry (projected closing speed <= 1e-6) returns the cap;
    the result is never negative and never exceeds the cap.
    """
    closing = (robot_v - obstacle_v).dot(ray_dir)
    if closing <= CLOSING_EPS:
        return cap
    return min(ray_distance / closing, cap)


def ttc_all(rays: RayScan, robot_v: Vec2, cap: float = TTC_CAP) -> np.ndarray:
    """Vectorized ttc over every ray of a scan."""
    dirs = rays.directions()
    obs_v = (
        rays.obstacle_velocities
        if rays.obstacle_velocities is not None
        else np.zeros((rays.n, 2))
    )
    rel = np.array([robot_v.x, robot_v.y])[None, :] - obs_v
    closing = np.einsum("nd,nd->n", rel, dirs)
    out = np.full(rays.n, cap)
    mask = closing > CLOSING_EPS
    out[mask] = np.minimum(rays.distances[mask] / closing[mask], cap)
    return out


def _ray_toward(rays: RayScan, direction: Vec2) -> int:
    """Index of the ray whose direction is closest to the given one."""
    dirs = rays.directions()
    d = np.array([direction.x, direction.y])
    return int(np.argmax(dirs @ d))


def r_track(cmd: Twist, actual: Twist) -> float:
    """4 exp(-4 |v_cmd - v|^2) + 3 exp(-2 (w_cmd - w)^2)."""
    dv = (cmd.linear() - actual.linear()).norm()
    dw = cmd.wz - actual.wz
    return 4.0 * math.exp(-4.0 * dv * dv) + 3.0 * math.exp(-2.0 * dw * dw)


def r_smooth(a_t: Twist, a_tm1: Twist, a_tm2: Twist) -> float:
    """-0.01 |a_t - 2 a_{t-1} + a_{t-2}|^2 over the 3-d twist."""
    d = [
        a_t.vx - 2.0 * a_tm1.vx + a_tm2.vx,
        a_t.vy - 2.0 * a_tm1.vy + a_tm2.vy,
        a_t.wz - 2.0 * a_tm1.wz + a_tm2.wz,
    ]
    return -0.01 * sum(x * x for x in d)


def r_collision(count: int) -> float:
    """-100 per overlapping obstacle."""
    return -100.0 * count


def r_vel(rays: RayScan, robot_v: Vec2, cap: float = TTC_CAP) -> float:
    """-exp(-2 ttc) on the ray closest to the velocity direction.

    Zero when the robot is essentially stationary (no direction defined).
    """
    if robot_v.norm() < SPEED_EPS:
        return 0.0
    i = _ray_toward(rays, robot_v.unit())
    obs_v = Vec2(0.0, 0.0)
    if rays.obstacle_velocities is not None:
        obs_v = Vec2(*rays.obstacle_velocities[i])
    t = ttc(float(rays.distances[i]), Vec2(*rays.directions()[i]), robot_v, obs_v, cap)
    return -math.exp(-2.0 * t)


def r_limit(a: Twist, limits: tuple[float, float, float] = VEL_LIMITS) -> float:
    """-10 ((|vx|-2.5)+ + (|vy|-1.5)+ + (|wz|-3)+); zero inside the box."""
    lx, ly, lw = limits
    return -10.0 * (
        max(abs(a.vx) - lx, 0.0) + max(abs(a.vy) - ly, 0.0) + max(abs(a.wz) - lw, 0.0)
    )


def r_over(inp: ShieldRewardInput, cap: float = TTC_CAP) -> float:
    """Over-reaction penalty, -5 per satisfied branch.

    Branch 1 fires when a clearly safe command (TTC along the commanded
    direction above 2 s) is answered by motion against it; branch 2 fires
    on significant motion while the command is near zero and every ray is
    comfortably far in time.
    """
    v = inp.robot_velocity_world
    v_cmd = inp.cmd_velocity_world
    v_hat = _unit_or_zero(v)
    v_cmd_hat = _unit_or_zero(v_cmd)
    total = 0.0
    if v_cmd.norm() > 0.2:
        i = _ray_toward(inp.rays, v_cmd_hat)
        obs_v = Vec2(0.0, 0.0)
        if inp.rays.obstacle_velocities is not None:
            obs_v = Vec2(*inp.rays.obstacle_velocities[i])
        t_cmd = ttc(
            float(inp.rays.distances[i]),
            Vec2(*inp.rays.directions()[i]),
            v_cmd,
            obs_v,
            cap,
        )
        if t_cmd > 2.0 and v_hat.dot(v_cmd_hat) < -0.25:
            total -= 5.0
    if v_cmd.norm() < 0.2:
        t_min = float(np.min(ttc_all(inp.rays, v, cap)))
        if t_min > 2.5 and v.norm() > 0.2:
            total -= 5.0
    return total


def r_goal(d: float) -> float:
    """Step-wise goal reward; the nested indicators stack additively."""
    out = 0.0
    if d < 0.5:
        out += 40.0
    if d < 1.0:
        out += 15.0
    if d < 2.0:
        out += 5.0
    return out


def r_progress(d_prv: float, d: float) -> float:
    """20 max(d_prv - d, 0)."""
    return 20.0 * max(d_prv - d, 0.0)


def r_guide(inp: NavRewardInput) -> float:
    """Guidance-following reward of the navigation policy.

    A zero cmd_direction or u_guide makes the dot product 0, which lands
    in the penalty branch whenever d >= 2.
    """
    dot = inp.cmd_direction.dot(inp.u_guide)
    out = 0.0
    if dot > 0.7 and inp.d >= 2.0:
        out += 1.0
    if inp.d < 2.0:
        out += 1.0
    if dot < 0.1 and inp.d >= 2.0:
        out -= 5.0
    return out


def r_time(d: float, t_rest: float) -> float:
    """-4 exp(-t_rest) while far from the goal."""
    if d < 2.0:
        return 0.0
    return -4.0 * math.exp(-t_rest)


def heuristic_avoid_velocity(
    rays: RayScan,
    cmd: Twist,
    radius: float = 1.5,
    limits: tuple[float, float, float] = VEL_LIMITS,
) -> Twist:
    """Intermediate avoidance command of the heuristic baseline.

    Rays closer than the repulsion radius push the linear command away
    with weight (radius - r) / radius; the result is clamped back into
    the velocity box. Ray directions here are base-frame, matching the
    base-frame command.
    """
    n = rays.n
    ang = np.arange(n) * (2.0 * np.pi / n)  # base frame
    close = rays.distances < radius
    w = (radius - rays.distances[close]) / radius
    px = -np.sum(w * np.cos(ang[close]))
    py = -np.sum(w * np.sin(ang[close]))
    out = Twist(cmd.vx + float(px), cmd.vy + float(py), cmd.wz)
    cfg = PlantConfig(velocity_limits=limits)
    return cfg.clamp_twist(out)


def shield_reward_terms(inp: ShieldRewardInput) -> dict[str, float]:
    """All shield terms at one tick, keyed by name."""
    return {
        "track": r_track(inp.cmd, inp.actual),
        "smooth": r_smooth(*inp.actions),
        "collision": r_collision(inp.collisions),
        "vel": r_vel(inp.rays, inp.robot_velocity_world),
        "limit": r_limit(inp.actions[0]),
        "over": r_over(inp),
    }


def nav_reward_terms(inp: NavRewardInput, action: Twist) -> dict[str, float]:
    return {
        "goal": r_goal(inp.d),
        "progress": r_progress(inp.d_prv, inp.d),
        "guide": r_guide(inp),
        "time": r_time(inp.d, inp.t_rest),
        "limit": r_limit(action),
    }
