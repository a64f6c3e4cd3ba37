import json
import math

import numpy as np
import pytest

from reasim.core import (
    Box,
    Circle,
    CrossingPath,
    Obstacle,
    PeriodicBlocker,
    PlantConfig,
    Rect,
    RobotState,
    SoftChase,
    Static,
    Twist,
    Vec2,
    WorldState,
    check_collision,
    step_obstacles,
    step_world,
)
from reasim.core.scenario_io import (
    Scenario,
    scenario_from_json,
    scenario_to_json,
)


def make_world(obstacles, seed=0, bounds=Rect(-5, -5, 5, 5)):
    robot = RobotState(position=Vec2(0, 0), heading=0.0, body_velocity=Twist.ZERO)
    return WorldState(dt=0.02, robot=robot, obstacles=obstacles, bounds=bounds, seed=seed)


def test_static_obstacle_never_moves():
    ob = Obstacle(id=0, shape=Circle(0.3), height=1.0, position=Vec2(2, 1), behavior=Static())
    w = make_world([ob])
    for _ in range(100):
        step_obstacles(w)
    assert ob.position == Vec2(2, 1)
    assert ob.velocity == Vec2(0, 0)


def test_soft_chase_retargets_only_on_arrival():
    beh = SoftChase(speed_range=(1.0, 1.0), arrival_tol=0.2)
    ob = Obstacle(id=0, shape=Circle(0.3), height=1.0, position=Vec2(3, 0), behavior=beh)
    w = make_world([ob])
    step_obstacles(w)
    # first tick: goal is set to the robot position and motion points there
    assert beh.goal == Vec2(0, 0)
    assert ob.velocity.x == pytest.approx(-1.0)
    assert ob.velocity.y == pytest.approx(0.0)
    goal_before = beh.goal
    # move the robot; the chaser must not retarget until it arrives
    w.robot.position = Vec2(0.0, 4.0)
    for _ in range(10):
        step_obstacles(w)
        if (ob.position - goal_before).norm() > beh.arrival_tol:
            assert beh.goal == goal_before
    # run until arrival: goal changes exactly at an arrival tick
    for _ in range(400):
        d_prev = (ob.position - goal_before).norm()
        step_obstacles(w)
        if beh.goal != goal_before:
            assert d_prev <= beh.arrival_tol + 1.0 * w.dt
            break
    else:
        pytest.fail("chaser never retargeted")
    assert beh.goal == Vec2(0.0, 4.0)


def test_periodic_blocker_returns_after_exactly_one_period():
    p0, p1 = Vec2(-1.0, 0.5), Vec2(2.0, 1.5)
    beh = PeriodicBlocker(p0=p0, p1=p1, period=4.0)
    ob = Obstacle(id=0, shape=Circle(0.2), height=1.0, position=p0, behavior=beh)
    w = make_world([ob])
    for _ in range(int(4.0 / w.dt)):
        step_obstacles(w)
        w.tick += 1
    assert (ob.position - p0).norm() <= 1e-9


def test_crossing_path_stays_on_line_through_anchor():
    anchor = Vec2(0.3, -0.2)
    d = Vec2(1.0, 2.0).unit()
    beh = CrossingPath(anchor=anchor, direction=d, speed=1.2, span=2.0, offset=-2.0, forward=True)
    ob = Obstacle(id=0, shape=Circle(0.2), height=1.0, position=anchor + d * -2.0, behavior=beh)
    w = make_world([ob])
    min_dist_to_anchor = math.inf
    for _ in range(600):
        step_obstacles(w)
        rel = ob.position - anchor
        # perpendicular residual from the line
        cross = abs(rel.x * d.y - rel.y * d.x)
        assert cross < 1e-9
        assert abs(beh.offset) <= beh.span + 1e-9
        min_dist_to_anchor = min(min_dist_to_anchor, rel.norm())
    assert min_dist_to_anchor < 0.1


def test_collision_gap_and_overlap_circle():
    robot_r = 0.35
    w = make_world(
        [Obstacle(id=1, shape=Circle(0.3), height=1.0, position=Vec2(1, 0))]
    )
    w.robot.radius = robot_r
    assert check_collision(w) == []
    w.obstacles[0].position = Vec2(0.5, 0)
    assert check_collision(w) == [1]
    # exact boundary contact does not count
    w.obstacles[0].position = Vec2(0.65, 0)
    assert check_collision(w) == []


def test_collision_box_matches_point_sampling_oracle():
    rng = np.random.default_rng(0)
    for _ in range(60):
        ob = Obstacle(
            id=0,
            shape=Box(half_x=rng.uniform(0.1, 0.8), half_y=rng.uniform(0.1, 0.8)),
            height=1.0,
            position=Vec2(*rng.uniform(-1.5, 1.5, 2)),
            angle=rng.uniform(0, 2 * math.pi),
        )
        w = make_world([ob])
        w.robot.position = Vec2(*rng.uniform(-1.5, 1.5, 2))
        got = bool(check_collision(w))
        # dense sampling of the disc boundary and interior
        th = np.linspace(0, 2 * np.pi, 720, endpoint=False)
        rr = np.linspace(0, w.robot.radius * 0.9999, 40)
        px = w.robot.position.x + np.outer(rr, np.cos(th)).ravel()
        py = w.robot.position.y + np.outer(rr, np.sin(th)).ravel()
        c, s = math.cos(ob.angle), math.sin(ob.angle)
        lx = (px - ob.position.x) * c + (py - ob.position.y) * s
        ly = -(px - ob.position.x) * s + (py - ob.position.y) * c
        inside = (np.abs(lx) <= ob.shape.half_x) & (np.abs(ly) <= ob.shape.half_y)
        expected = bool(inside.any())
        if got != expected:
            # sampling may miss grazing overlaps; tolerate only near-touch cases
            from reasim.core.collision import distance_to_obstacle

            d = distance_to_obstacle(w.robot.position, ob)
            assert abs(d - w.robot.radius) < 1e-3
        else:
            assert got == expected


def test_collision_symmetric_under_rigid_transform():
    rng = np.random.default_rng(3)
    for _ in range(40):
        shape = (
            Circle(rng.uniform(0.1, 0.6))
            if rng.random() < 0.5
            else Box(rng.uniform(0.1, 0.6), rng.uniform(0.1, 0.6))
        )
        ob = Obstacle(
            id=0, shape=shape, height=1.0,
            position=Vec2(*rng.uniform(-1, 1, 2)), angle=rng.uniform(0, 6.28),
        )
        w = make_world([ob])
        w.robot.position = Vec2(*rng.uniform(-1, 1, 2))
        before = bool(check_collision(w))
        # rotate + translate both bodies
        phi = rng.uniform(0, 2 * math.pi)
        t = Vec2(*rng.uniform(-3, 3, 2))
        w.robot.position = w.robot.position.rotated(phi) + t
        ob.position = ob.position.rotated(phi) + t
        ob.angle += phi
        assert bool(check_collision(w)) == before


def test_world_step_bitwise_determinism():
    def run():
        obs = [
            Obstacle(id=0, shape=Circle(0.3), height=1.0, position=Vec2(2, 0),
                     behavior=SoftChase()),
            Obstacle(id=1, shape=Box(0.3, 0.2), height=1.0, position=Vec2(-2, 1),
                     behavior=Static()),
        ]
        w = make_world(obs, seed=42)
        cfg = PlantConfig()
        log = []
        for k in range(200):
            cmd = Twist(1.0 if k % 50 < 25 else -0.5, 0.2, 0.3)
            step_world(w, cmd, cfg)
            log.append(
                (w.robot.position.x, w.robot.position.y, w.robot.heading,
                 obs[0].position.x, obs[0].position.y)
            )
        return log

    assert run() == run()  # bitwise identical tuples


def test_scenario_json_round_trip():
    obs = [
        Obstacle(id=0, shape=Circle(0.3), height=1.2, position=Vec2(2, 0),
                 behavior=SoftChase(speed_range=(0.5, 1.5))),
        Obstacle(id=1, shape=Box(0.4, 0.2), height=0.8, position=Vec2(-2, 1), angle=0.3,
                 behavior=Static()),
        Obstacle(id=2, shape=Circle(0.2), height=1.0, position=Vec2(0, 2),
                 behavior=PeriodicBlocker(p0=Vec2(0, 2), p1=Vec2(1, 2), period=3.0)),
    ]
    w = make_world(obs, seed=9)
    sc = Scenario(world=w, goal=Vec2(3, 3), episode_length_s=15.0)
    doc = scenario_to_json(sc)
    json.dumps(doc)  # serializable
    back = scenario_from_json(doc)
    assert back.world.seed == 9
    assert back.goal == Vec2(3, 3)
    assert len(back.world.obstacles) == 3
    assert isinstance(back.world.obstacles[0].behavior, SoftChase)
    assert back.world.obstacles[1].angle == pytest.approx(0.3)
