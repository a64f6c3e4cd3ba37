"""Reward kernels versus independently written oracles.

The oracles below are deliberately separate implementations: plain math
over tuples, no imports from reasim.rewards beyond the functions under
test, with ray bookkeeping done longhand.
"""

import math

import numpy as np
import pytest

from reasim.core import PlantConfig, Twist, Vec2
from reasim.raycast.frames import RayScan
from reasim.rewards import (
    NavRewardInput,
    ShieldRewardInput,
    heuristic_avoid_velocity,
    r_collision,
    r_goal,
    r_guide,
    r_limit,
    r_over,
    r_progress,
    r_smooth,
    r_time,
    r_track,
    r_vel,
    ttc,
)

N_RAYS = 180


# ------------------------------------------------------------------- oracles

def oracle_ttc(r, u, v, v_obs, cap=10.0):
    closing = (v[0] - v_obs[0]) * u[0] + (v[1] - v_obs[1]) * u[1]
    if closing <= 1e-6:
        return cap
    return min(r / closing, cap)


def oracle_track(cmd, actual):
    dv2 = (cmd[0] - actual[0]) ** 2 + (cmd[1] - actual[1]) ** 2
    dw = cmd[2] - actual[2]
    return 4.0 * math.exp(-4.0 * dv2) + 3.0 * math.exp(-2.0 * dw * dw)


def oracle_smooth(a0, a1, a2):
    acc = 0.0
    for i in range(3):
        d = a0[i] - 2.0 * a1[i] + a2[i]
        acc += d * d
    return -0.01 * acc


def oracle_limit(a):
    return -10.0 * (
        max(abs(a[0]) - 2.5, 0.0) + max(abs(a[1]) - 1.5, 0.0) + max(abs(a[2]) - 3.0, 0.0)
    )


def oracle_goal(d):
    return (40.0 if d < 0.5 else 0.0) + (15.0 if d < 1.0 else 0.0) + (5.0 if d < 2.0 else 0.0)


def oracle_guide(dot, d):
    out = 0.0
    if dot > 0.7 and d >= 2.0:
        out += 1.0
    if d < 2.0:
        out += 1.0
    if dot < 0.1 and d >= 2.0:
        out -= 5.0
    return out


def ray_dir(i, heading):
    a = heading + i * 2.0 * math.pi / N_RAYS
    return (math.cos(a), math.sin(a))


def oracle_vel(distances, heading, obs_vels, v):
    speed = math.hypot(v[0], v[1])
    if speed < 1e-3:
        return 0.0
    best_i, best_dot = 0, -math.inf
    for i in range(N_RAYS):
        u = ray_dir(i, heading)
        dot = (u[0] * v[0] + u[1] * v[1]) / speed
        if dot > best_dot:
            best_dot, best_i = dot, i
    t = oracle_ttc(distances[best_i], ray_dir(best_i, heading), v, obs_vels[best_i])
    return -math.exp(-2.0 * t)


def oracle_over(distances, heading, obs_vels, v, v_cmd):
    out = 0.0
    cmd_speed = math.hypot(v_cmd[0], v_cmd[1])
    v_speed = math.hypot(v[0], v[1])
    if cmd_speed > 0.2:
        best_i, best_dot = 0, -math.inf
        for i in range(N_RAYS):
            u = ray_dir(i, heading)
            dot = (u[0] * v_cmd[0] + u[1] * v_cmd[1]) / cmd_speed
            if dot > best_dot:
                best_dot, best_i = dot, i
        t_cmd = oracle_ttc(distances[best_i], ray_dir(best_i, heading), v_cmd, obs_vels[best_i])
        v_hat = (v[0] / v_speed, v[1] / v_speed) if v_speed >= 1e-3 else (0.0, 0.0)
        c_hat = (v_cmd[0] / cmd_speed, v_cmd[1] / cmd_speed)
        if t_cmd > 2.0 and (v_hat[0] * c_hat[0] + v_hat[1] * c_hat[1]) < -0.25:
            out -= 5.0
    if cmd_speed < 0.2:
        t_min = min(
            oracle_ttc(distances[i], ray_dir(i, heading), v, obs_vels[i])
            for i in range(N_RAYS)
        )
        if t_min > 2.5 and v_speed > 0.2:
            out -= 5.0
    return out


def oracle_heuristic(distances, cmd):
    px = py = 0.0
    for i in range(N_RAYS):
        if distances[i] < 1.5:
            w = (1.5 - distances[i]) / 1.5
            a = i * 2.0 * math.pi / N_RAYS
            px -= w * math.cos(a)
            py -= w * math.sin(a)
    vx, vy = cmd[0] + px, cmd[1] + py
    return (
        min(max(vx, -2.5), 2.5),
        min(max(vy, -1.5), 1.5),
        min(max(cmd[2], -3.0), 3.0),
    )


def random_scan(rng, heading):
    d = rng.uniform(0.05, 3.0, N_RAYS)
    vels = rng.uniform(-2, 2, (N_RAYS, 2))
    return RayScan(
        distances=d, heading=heading, hit_ids=np.zeros(N_RAYS, dtype=np.int64),
        obstacle_velocities=vels,
    )


# ------------------------------------------------------- spec worked examples

def test_ttc_examples():
    assert ttc(2.0, Vec2(1, 0), Vec2(1, 0), Vec2(0, 0)) == pytest.approx(2.0, abs=1e-12)
    assert ttc(1.0, Vec2(1, 0), Vec2(1, 0), Vec2(-1, 0)) == pytest.approx(0.5, abs=1e-12)
    assert ttc(1.0, Vec2(1, 0), Vec2(-1, 0), Vec2(0, 0)) == 10.0  # receding


def test_ttc_scale_consistency():
    rng = np.random.default_rng(0)
    for _ in range(200):
        r = rng.uniform(0.1, 3.0)
        u = Vec2(*rng.normal(size=2)).unit()
        v = Vec2(*rng.uniform(-2, 2, 2))
        vo = Vec2(*rng.uniform(-2, 2, 2))
        t1 = ttc(r, u, v, vo)
        t2 = ttc(2 * r, u, Vec2(2 * v.x, 2 * v.y), Vec2(2 * vo.x, 2 * vo.y))
        assert t1 == pytest.approx(t2, abs=1e-12)


def test_track_examples():
    assert r_track(Twist(1, 1, 0.5), Twist(1, 1, 0.5)) == pytest.approx(7.0)
    assert r_track(Twist(1, 0, 0.3), Twist(0, 0, 0.3)) == pytest.approx(3.073263, abs=1e-6)
    assert r_track(Twist(0.4, -0.2, 1.0), Twist(0.4, -0.2, 0.0)) == pytest.approx(
        4.406006, abs=1e-6
    )


def test_smooth_examples():
    a = Twist(0.7, -0.3, 1.1)
    assert r_smooth(a, a, a) == 0.0
    assert r_smooth(Twist(2, 0, 0), Twist(1, 0, 0), Twist(0, 0, 0)) == 0.0
    assert r_smooth(Twist(1, 0, 0), Twist(0, 0, 0), Twist(0, 0, 0)) == pytest.approx(-0.01)


def test_collision_examples():
    assert r_collision(0) == 0.0
    assert r_collision(1) == -100.0
    assert r_collision(2) == -200.0


def test_vel_examples():
    heading = 0.0
    d = np.full(N_RAYS, 3.0)
    vels = np.zeros((N_RAYS, 2))
    # craft the ttc on the forward ray: distance 2 at closing speed 1 -> ttc 2
    d[0] = 2.0
    scan = RayScan(distances=d, heading=heading, obstacle_velocities=vels)
    out = r_vel(scan, Vec2(1.0, 0.0))
    assert out == pytest.approx(-math.exp(-4.0), abs=1e-9)
    # stationary robot: no direction, term is zero
    assert r_vel(scan, Vec2(0.0, 0.0)) == 0.0
    # ttc 0 is impossible through the formula; exp(-2*0) = -1 via direct eval
    assert -math.exp(-2.0 * 0.0) == -1.0
    # at the cap the penalty is negligible
    far = RayScan(distances=np.full(N_RAYS, 3.0), heading=0.0,
                  obstacle_velocities=np.zeros((N_RAYS, 2)))
    out = r_vel(far, Vec2(1e-2, 0.0))
    assert out == pytest.approx(-math.exp(-20.0), abs=1e-12)


def test_limit_examples():
    assert r_limit(Twist(2.5, 1.5, 3.0)) == 0.0
    assert r_limit(Twist(3.0, 0.0, 0.0)) == pytest.approx(-5.0)
    assert r_limit(Twist(3.0, 2.0, 4.0)) == pytest.approx(-20.0)
    assert r_limit(Twist(-2.5, -1.5, -3.0)) == 0.0
    assert r_limit(Twist(-2.6, 0.0, 0.0)) < 0.0


def test_goal_examples():
    assert r_goal(0.3) == 60.0
    assert r_goal(1.5) == 5.0
    assert r_goal(3.0) == 0.0
    # summation oracle over the indicator thresholds
    for d in (0.0, 0.49, 0.5, 0.99, 1.0, 1.99, 2.0, 5.0):
        assert r_goal(d) == oracle_goal(d)


def test_progress_examples():
    assert r_progress(5.0, 4.5) == pytest.approx(10.0)
    assert r_progress(4.0, 4.5) == 0.0
    assert r_progress(4.0, 4.0) == 0.0


def test_guide_examples():
    u = Vec2(1.0, 0.0)
    assert r_guide(NavRewardInput(5.0, 5.0, Vec2(0.9, 0.4359).unit(), u, 1.0)) == 1.0
    assert r_guide(NavRewardInput(1.0, 1.0, Vec2(-1, 0), u, 1.0)) == 1.0
    mid = Vec2(0.5, math.sqrt(1 - 0.25))  # dot exactly 0.5
    assert r_guide(NavRewardInput(5.0, 5.0, mid, u, 1.0)) == 0.0
    # zero vectors make the dot 0, firing the penalty branch when far
    assert r_guide(NavRewardInput(5.0, 5.0, Vec2(0, 0), u, 1.0)) == -5.0


def test_time_examples():
    assert r_time(1.0, 0.0) == 0.0
    assert r_time(5.0, 0.0) == pytest.approx(-4.0)
    assert r_time(5.0, 2.0) == pytest.approx(-0.541341, abs=1e-6)


def test_over_examples():
    heading = 0.0
    vels = np.zeros((N_RAYS, 2))
    far = RayScan(distances=np.full(N_RAYS, 3.0), heading=heading, obstacle_velocities=vels)

    def inp(v_world, cmd_world):
        return ShieldRewardInput(
            cmd=Twist(cmd_world.x, cmd_world.y, 0.0),
            actual=Twist(v_world.x, v_world.y, 0.0),
            actions=(Twist.ZERO,) * 3,
            rays=far,
            robot_velocity_world=v_world,
            cmd_velocity_world=cmd_world,
            collisions=0,
        )

    # branch 1: safe command (ttc = cap), motion against it
    assert r_over(inp(Vec2(-0.5, 0.1), Vec2(1.0, 0.0))) == -5.0
    # branch 2: near-zero command, clear rays, significant motion
    assert r_over(inp(Vec2(0.5, 0.0), Vec2(0.1, 0.0))) == -5.0
    # aligned motion under a safe command
    assert r_over(inp(Vec2(1.0, 0.0), Vec2(1.0, 0.0))) == 0.0


def test_heuristic_examples():
    heading = 0.0
    vels = np.zeros((N_RAYS, 2))
    clear = RayScan(distances=np.full(N_RAYS, 3.0), heading=heading, obstacle_velocities=vels)
    cmd = Twist(1.0, 0.2, 0.5)
    assert heuristic_avoid_velocity(clear, cmd) == cmd

    d = np.full(N_RAYS, 3.0)
    d[0] = 0.5  # close obstacle straight ahead
    front = RayScan(distances=d, heading=heading, obstacle_velocities=vels)
    out = heuristic_avoid_velocity(front, Twist(1.0, 0.0, 0.0))
    assert out.vx < 1.0  # deflected away
    assert abs(out.vx) <= 2.5 and abs(out.vy) <= 1.5

    d2 = np.full(N_RAYS, 3.0)
    d2[45] = 0.5   # left
    d2[135] = 0.5  # right
    sym = RayScan(distances=d2, heading=heading, obstacle_velocities=vels)
    out = heuristic_avoid_velocity(sym, Twist(1.0, 0.0, 0.0))
    assert out.vy == pytest.approx(0.0, abs=1e-12)  # lateral pushes cancel
    assert out.vx == pytest.approx(1.0, abs=1e-12)


# -------------------------------------------------------------- oracle fuzz

def test_kernels_match_oracles_on_random_inputs():
    rng = np.random.default_rng(2024)
    n = 1000
    for _ in range(n):
        heading = float(rng.uniform(-math.pi, math.pi))
        scan = random_scan(rng, heading)
        v = Vec2(*rng.uniform(-2.5, 2.5, 2))
        v_cmd = Vec2(*rng.uniform(-2.5, 2.5, 2))
        cmd = Twist(*rng.uniform(-3, 3, 3))
        act = Twist(*rng.uniform(-3, 3, 3))
        a1, a2 = Twist(*rng.uniform(-3, 3, 3)), Twist(*rng.uniform(-3, 3, 3))
        d, d_prv = float(rng.uniform(0, 8)), float(rng.uniform(0, 8))
        t_rest = float(rng.uniform(0, 15))

        assert r_track(cmd, act) == pytest.approx(
            oracle_track(cmd.as_tuple(), act.as_tuple()), abs=1e-9
        )
        assert r_smooth(cmd, a1, a2) == pytest.approx(
            oracle_smooth(cmd.as_tuple(), a1.as_tuple(), a2.as_tuple()), abs=1e-9
        )
        assert r_limit(cmd) == pytest.approx(oracle_limit(cmd.as_tuple()), abs=1e-9)
        assert r_goal(d) == oracle_goal(d)
        assert r_progress(d_prv, d) == pytest.approx(20.0 * max(d_prv - d, 0.0), abs=1e-9)

        u_guide = Vec2(*rng.normal(size=2)).unit()
        cd = Vec2(*rng.normal(size=2)).unit()
        assert r_guide(NavRewardInput(d, d_prv, cd, u_guide, t_rest)) == pytest.approx(
            oracle_guide(cd.dot(u_guide), d), abs=1e-9
        )
        expected_time = -4.0 * math.exp(-t_rest) if d >= 2.0 else 0.0
        assert r_time(d, t_rest) == pytest.approx(expected_time, abs=1e-9)

        r_i = float(rng.uniform(0.05, 3.0))
        u = Vec2(*rng.normal(size=2)).unit()
        vo = Vec2(*rng.uniform(-2, 2, 2))
        assert ttc(r_i, u, v, vo) == pytest.approx(
            oracle_ttc(r_i, (u.x, u.y), (v.x, v.y), (vo.x, vo.y)), abs=1e-9
        )

        assert r_vel(scan, v) == pytest.approx(
            oracle_vel(scan.distances, heading, scan.obstacle_velocities, (v.x, v.y)),
            abs=1e-9,
        )

        inp = ShieldRewardInput(
            cmd=cmd, actual=act, actions=(cmd, a1, a2), rays=scan,
            robot_velocity_world=v, cmd_velocity_world=v_cmd,
            collisions=int(rng.integers(0, 3)),
        )
        assert r_over(inp) == pytest.approx(
            oracle_over(
                scan.distances, heading, scan.obstacle_velocities,
                (v.x, v.y), (v_cmd.x, v_cmd.y),
            ),
            abs=1e-9,
        )

        got = heuristic_avoid_velocity(scan, cmd)
        want = oracle_heuristic(scan.distances, cmd.as_tuple())
        assert got.vx == pytest.approx(want[0], abs=1e-9)
        assert got.vy == pytest.approx(want[1], abs=1e-9)
        assert got.wz == pytest.approx(want[2], abs=1e-9)


def test_kernel_ranges():
    rng = np.random.default_rng(9)
    for _ in range(300):
        cmd = Twist(*rng.uniform(-3, 3, 3))
        act = Twist(*rng.uniform(-3, 3, 3))
        assert 0.0 < r_track(cmd, act) <= 7.0
        d = float(rng.uniform(0, 10))
        assert r_goal(d) in (0.0, 5.0, 20.0, 60.0)
        scan = random_scan(rng, 0.0)
        v = Vec2(*rng.uniform(-2.5, 2.5, 2))
        rv = r_vel(scan, v)
        assert -1.0 <= rv <= 0.0
        u_guide = Vec2(*rng.normal(size=2)).unit()
        cd = Vec2(*rng.normal(size=2)).unit()
        assert r_guide(NavRewardInput(d, d, cd, u_guide, 1.0)) in (-5.0, 0.0, 1.0, 2.0)
