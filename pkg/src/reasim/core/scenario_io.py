"""Scenario JSON documents and replay logs.

Scenario files carry the full initial world: bounds, grid cell size,
static and dynamic obstacles, robot start, optional goal, episode length,
and the seed. Replay logs are JSON-lines with one record per tick.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO, Any

from .behaviors import (
    Behavior,
    CrossingPath,
    HumanPuppet,
    PeriodicBlocker,
    RandomWaypoint,
    SoftChase,
    Static,
)
from .types import Box, Circle, Obstacle, Rect, RobotState, Twist, Vec2
from .world import WorldState

SCENARIO_VERSION = 1


def _vec(v: Vec2) -> list[float]:
    return [v.x, v.y]


def _shape_to_json(shape) -> dict:
    if isinstance(shape, Circle):
        return {"type": "circle", "radius": shape.radius}
    return {"type": "box", "half_extents": [shape.half_x, shape.half_y]}


def _shape_from_json(d: dict):
    if d["type"] == "circle":
        return Circle(radius=d["radius"])
    hx, hy = d["half_extents"]
    return Box(half_x=hx, half_y=hy)


def _behavior_to_json(b: Behavior | None) -> dict:
    if b is None or isinstance(b, Static):
        return {"type": "static"}
    if isinstance(b, SoftChase):
        return {
            "type": "soft_chase",
            "speed_range": list(b.speed_range),
            "arrival_tol": b.arrival_tol,
        }
    if isinstance(b, RandomWaypoint):
        out = {"type": "random_waypoint", "speed_range": list(b.speed_range)}
        if b.region is not None:
            out["region"] = [b.region.xmin, b.region.ymin, b.region.xmax, b.region.ymax]
        return out
    if isinstance(b, PeriodicBlocker):
        return {
            "type": "periodic_blocker",
            "p0": _vec(b.p0),
            "p1": _vec(b.p1),
            "period": b.period,
        }
    if isinstance(b, CrossingPath):
        return {
            "type": "crossing_path",
            "anchor": _vec(b.anchor),
            "direction": _vec(b.direction),
            "speed": b.speed,
            "span": b.span,
            "offset": b.offset,
        }
    if isinstance(b, HumanPuppet):
        return {"type": "human", "speed_cap": b.speed_cap}
    raise ValueError(f"unknown behavior {type(b).__name__}")


def _behavior_from_json(d: dict) -> Behavior:
    kind = d["type"]
    if kind == "static":
        return Static()
    if kind == "soft_chase":
        return SoftChase(
            speed_range=tuple(d["speed_range"]), arrival_tol=d.get("arrival_tol", 0.2)
        )
    if kind == "random_waypoint":
        region = None
        if "region" in d:
            region = Rect(*d["region"])
        return RandomWaypoint(speed_range=tuple(d["speed_range"]), region=region)
    if kind == "periodic_blocker":
        return PeriodicBlocker(
            p0=Vec2(*d["p0"]), p1=Vec2(*d["p1"]), period=d["period"]
        )
    if kind == "crossing_path":
        return CrossingPath(
            anchor=Vec2(*d["anchor"]),
            direction=Vec2(*d["direction"]),
            speed=d["speed"],
            span=d["span"],
            offset=d.get("offset", 0.0),
        )
    if kind == "human":
        return HumanPuppet(speed_cap=d.get("speed_cap", 3.0))
    raise ValueError(f"unknown behavior type {kind!r}")


def obstacle_to_json(ob: Obstacle) -> dict:
    return {
        "id": ob.id,
        "shape": _shape_to_json(ob.shape),
        "height": ob.height,
        "position": _vec(ob.position),
        "angle": ob.angle,
        "velocity": _vec(ob.velocity),
        "behavior": _behavior_to_json(ob.behavior),
    }


def obstacle_from_json(d: dict) -> Obstacle:
    return Obstacle(
        id=d["id"],
        shape=_shape_from_json(d["shape"]),
        height=d["height"],
        position=Vec2(*d["position"]),
        angle=d.get("angle", 0.0),
        velocity=Vec2(*d.get("velocity", [0.0, 0.0])),
        behavior=_behavior_from_json(d["behavior"]),
    )


@dataclass
class Scenario:
    """A scenario document plus the generated extras kept alongside it."""

    world: WorldState
    goal: Vec2 | None
    episode_length_s: float
    grid_cell_size: float = 0.1


def scenario_to_json(sc: Scenario) -> dict:
    w = sc.world
    statics = [ob for ob in w.obstacles if ob.behavior is None or isinstance(ob.behavior, Static)]
    dynamics = [ob for ob in w.obstacles if ob not in statics]
    doc: dict[str, Any] = {
        "version": SCENARIO_VERSION,
        "bounds": [w.bounds.xmin, w.bounds.ymin, w.bounds.xmax, w.bounds.ymax],
        "grid_cell_size": sc.grid_cell_size,
        "static_obstacles": [obstacle_to_json(ob) for ob in statics],
        "dynamic_obstacles": [obstacle_to_json(ob) for ob in dynamics],
        "robot_start": {
            "position": _vec(w.robot.position),
            "heading": w.robot.heading,
            "radius": w.robot.radius,
        },
        "episode_length_s": sc.episode_length_s,
        "seed": w.seed,
    }
    if sc.goal is not None:
        doc["goal"] = _vec(sc.goal)
    return doc


def scenario_from_json(doc: dict) -> Scenario:
    bounds = Rect(*doc["bounds"])
    rs = doc["robot_start"]
    robot = RobotState(
        position=Vec2(*rs["position"]),
        heading=rs.get("heading", 0.0),
        body_velocity=Twist.ZERO,
        radius=rs.get("radius", 0.35),
    )
    # the file format splits static and dynamic; id order is the canonical
    # obstacle order (it fixes the behavior RNG consumption sequence)
    obstacles = [obstacle_from_json(d) for d in doc["static_obstacles"]]
    obstacles += [obstacle_from_json(d) for d in doc["dynamic_obstacles"]]
    obstacles.sort(key=lambda ob: ob.id)
    world = WorldState(
        dt=0.02,
        robot=robot,
        obstacles=obstacles,
        bounds=bounds,
        seed=doc["seed"],
    )
    goal = Vec2(*doc["goal"]) if "goal" in doc else None
    return Scenario(
        world=world,
        goal=goal,
        episode_length_s=doc["episode_length_s"],
        grid_cell_size=doc.get("grid_cell_size", 0.1),
    )


def save_scenario(sc: Scenario, path: str) -> None:
    with open(path, "w") as f:
        json.dump(scenario_to_json(sc), f, indent=1, sort_keys=True)


def load_scenario(path: str) -> Scenario:
    with open(path) as f:
        return scenario_from_json(json.load(f))


class ReplayWriter:
    """JSON-lines replay log, one record per tick."""

    def __init__(self, fh: IO[str]):
        self._fh = fh

    def write_tick(
        self,
        world: WorldState,
        cmd_nav: Twist | None = None,
        cmd_safe: Twist | None = None,
        rays: list[float] | None = None,
    ) -> None:
        rec = {
            "tick": world.tick,
            "robot": {
                "position": _vec(world.robot.position),
                "heading": world.robot.heading,
                "body_velocity": list(world.robot.body_velocity.as_tuple()),
            },
            "obstacles": [
                {"id": ob.id, "position": _vec(ob.position), "velocity": _vec(ob.velocity)}
                for ob in world.obstacles
            ],
            "cmd_nav": list(cmd_nav.as_tuple()) if cmd_nav else None,
            "cmd_safe": list(cmd_safe.as_tuple()) if cmd_safe else None,
        }
        if rays is not None:
            rec["rays"] = [round(float(r), 6) for r in rays]
        self._fh.write(json.dumps(rec) + "\n")


def read_replay(path: str) -> list[dict]:
    with open(path) as f:
        return [json.loads(line) for line in f if line.strip()]
