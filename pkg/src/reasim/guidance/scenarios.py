"""Scenario generators for training and evaluation worlds.

Every generator is a pure function of (kind, parameters, seed). The desk
minis used by the evaluation batteries are versioned presets; bumping any
preset must bump PRESET_VERSION so reported numbers stay comparable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .. import rng as rng_mod
from ..core.behaviors import (
    CrossingPath,
    PeriodicBlocker,
    RandomWaypoint,
    SoftChase,
    Static,
)
from ..core.scenario_io import Scenario
from ..core.types import Box, Circle, Obstacle, Rect, RobotState, Twist, Vec2
from ..core.world import WorldState
from ..errors import GenerationError, InvalidInputError
from .field import GuidanceField, build_field
from .grid import OccupancyGrid, build_occupancy

PRESET_VERSION = 1

KINDS = (
    "soft_chase",
    "scatter",
    "maze",
    "sca_sparse",
    "sca_dense",
    "dymaze",
    "hold",
)

_MAX_ATTEMPTS = 200


@dataclass
class ScenarioSpec:
    kind: str
    seed: int
    scale: str = "desk"
    params: dict = dc_field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise InvalidInputError(f"unknown scenario kind {self.kind!r}")
        if self.scale not in ("desk", "paper"):
            raise InvalidInputError(f"unknown scale {self.scale!r}")


@dataclass
class GeneratedScenario:
    spec: ScenarioSpec
    world: WorldState
    goal: Vec2 | None
    grid: OccupancyGrid | None
    field: GuidanceField | None
    episode_length_s: float

    def to_scenario(self) -> Scenario:
        return Scenario(
            world=self.world,
            goal=self.goal,
            episode_length_s=self.episode_length_s,
            grid_cell_size=self.grid.cell_size if self.grid else 0.1,
        )


# ------------------------------------------------------------------- presets

def preset(kind: str, scale: str) -> dict:
    """Default parameters per (kind, scale); see PRESET_VERSION."""
    desk = scale == "desk"
    if kind in ("scatter", "sca_sparse", "sca_dense"):
        base = dict(
            size=10.0 if desk else 16.0,
            n_static=8 if desk else 20,
            n_dynamic=0,
            dyn_speed=(0.4, 1.0),
            goal_range=(3.0, 5.5) if desk else (4.0, 7.0),
            episode_s=15.0,
            clear_radius=1.3,
        )
        if kind == "sca_sparse":
            base.update(n_static=7 if desk else 14, n_dynamic=2, clear_radius=1.5)
        elif kind == "sca_dense":
            base.update(
                n_static=14 if desk else 40,
                n_dynamic=3,
                clear_radius=1.1,
                goal_range=(3.0, 5.0) if desk else (4.0, 7.0),
            )
        return base
    if kind == "soft_chase":
        return dict(
            size=10.0 if desk else 16.0,
            n_static=6 if desk else 16,
            n_chasers=0,
            chaser_speed=(0.5, 1.6) if desk else (0.5, 2.0),
            episode_s=20.0,
            clear_radius=1.5,
        )
    if kind in ("maze", "dymaze"):
        base = dict(
            cells=(5, 5) if desk else (7, 7),
            cell_m=1.7 if desk else 1.8,
            wall_thickness=0.12,
            wall_height=1.5,
            extra_openings=3 if desk else 4,
            straight_range=(2.6, 5.0) if desk else (5.0, 7.0),
            path_range=(2.6, 10.0) if desk else (5.0, 15.0),
            episode_s=30.0,
            n_blockers=0,
        )
        if kind == "dymaze":
            base.update(n_blockers=2 if desk else 4, blocker_period=(4.0, 8.0))
        return base
    if kind == "hold":
        return dict(
            size=8.0 if desk else 12.0,
            n_crossers=(2, 4),
            crosser_speed=(0.6, 1.4),
            span=(2.4, 3.4) if desk else (3.0, 5.0),
            episode_s=15.0,
        )
    raise InvalidInputError(f"unknown kind {kind!r}")


def _merged(spec: ScenarioSpec) -> dict:
    p = preset(spec.kind, spec.scale)
    unknown = set(spec.params) - set(p)
    if unknown:
        raise InvalidInputError(f"unknown scenario parameters {sorted(unknown)}")
    p.update(spec.params)
    return p


# ------------------------------------------------------------------ helpers

def _mk_world(bounds: Rect, obstacles: list[Obstacle], start: Vec2, heading: float, seed: int):
    robot = RobotState(position=start, heading=heading, body_velocity=Twist.ZERO)
    return WorldState(dt=0.02, robot=robot, obstacles=obstacles, bounds=bounds, seed=seed)


def _scatter_statics(
    rng: np.random.Generator,
    bounds: Rect,
    n: int,
    keep_clear: list[tuple[Vec2, float]],
    start_id: int = 0,
    min_gap: float = 0.25,
) -> list[Obstacle]:
    """Scatter circles and boxes with clear zones and pairwise gaps."""
    placed: list[Obstacle] = []
    inner = bounds.shrunk(0.8)
    attempts = 0
    while len(placed) < n and attempts < 40 * n + 200:
        attempts += 1
        pos = Vec2(
            float(rng.uniform(inner.xmin, inner.xmax)),
            float(rng.uniform(inner.ymin, inner.ymax)),
        )
        if rng.random() < 0.5:
            shape = Circle(radius=float(rng.uniform(0.25, 0.5)))
        else:
            shape = Box(
                half_x=float(rng.uniform(0.2, 0.5)), half_y=float(rng.uniform(0.2, 0.5))
            )
        height = float(rng.uniform(0.5, 1.8))
        ob = Obstacle(
            id=start_id + len(placed),
            shape=shape,
            height=height,
            position=pos,
            angle=float(rng.uniform(0, 2 * math.pi)),
            behavior=Static(),
        )
        rad = ob.bounding_radius()
        if any((pos - c).norm() < rad + r for c, r in keep_clear):
            continue
        if any(
            (pos - q.position).norm() < rad + q.bounding_radius() + min_gap
            for q in placed
        ):
            continue
        placed.append(ob)
    if len(placed) < n:
        raise GenerationError(f"could not place {n} static obstacles")
    return placed


def _sample_goal(
    rng: np.random.Generator,
    grid: OccupancyGrid,
    start: Vec2,
    bounds: Rect,
    goal_range: tuple[float, float],
) -> tuple[Vec2, GuidanceField] | None:
    lo, hi = goal_range
    for _ in range(_MAX_ATTEMPTS):
        ang = rng.uniform(0, 2 * math.pi)
        r = rng.uniform(lo, hi)
        goal = Vec2(start.x + r * math.cos(ang), start.y + r * math.sin(ang))
        if not bounds.shrunk(0.6).contains(goal):
            continue
        if not grid.is_free(goal):
            continue
        fld = build_field(grid, goal)
        if math.isfinite(fld.cost_at(start)):
            return goal, fld
    return None


# --------------------------------------------------------------- generators

def _gen_scatter(spec: ScenarioSpec, p: dict, rng: np.random.Generator) -> GeneratedScenario:
    half = p["size"] / 2.0
    bounds = Rect(-half, -half, half, half)
    start = Vec2(0.0, 0.0)
    heading = float(rng.uniform(-math.pi, math.pi))
    for _ in range(_MAX_ATTEMPTS):
        clear = [(start, p["clear_radius"])]
        statics = _scatter_statics(rng, bounds, p["n_static"], clear)
        grid = build_occupancy(statics, bounds)
        got = _sample_goal(rng, grid, start, bounds, p["goal_range"])
        if got is None:
            continue
        goal, fld = got
        dynamics = []
        for k in range(p["n_dynamic"]):
            pos = _free_spawn(rng, bounds, statics, start, min_start_dist=2.0)
            if pos is None:
                break
            dynamics.append(
                Obstacle(
                    id=1000 + k,
                    shape=Circle(radius=0.3),
                    height=float(rng.uniform(0.8, 1.6)),
                    position=pos,
                    behavior=RandomWaypoint(
                        speed_range=tuple(p["dyn_speed"]), region=bounds.shrunk(0.8)
                    ),
                )
            )
        if len(dynamics) < p["n_dynamic"]:
            continue
        world = _mk_world(bounds, statics + dynamics, start, heading, spec.seed)
        return GeneratedScenario(spec, world, goal, grid, fld, p["episode_s"])
    raise GenerationError(f"no feasible {spec.kind} sample for seed {spec.seed}")


def _free_spawn(rng, bounds, statics, start, min_start_dist, radius=0.35):
    inner = bounds.shrunk(0.8)
    for _ in range(60):
        pos = Vec2(
            float(rng.uniform(inner.xmin, inner.xmax)),
            float(rng.uniform(inner.ymin, inner.ymax)),
        )
        if (pos - start).norm() < min_start_dist:
            continue
        from ..core.collision import distance_to_obstacle

        if all(distance_to_obstacle(pos, ob) > radius + 0.1 for ob in statics):
            return pos
    return None


def _gen_soft_chase(spec: ScenarioSpec, p: dict, rng: np.random.Generator) -> GeneratedScenario:
    half = p["size"] / 2.0
    bounds = Rect(-half, -half, half, half)
    start = Vec2(0.0, 0.0)
    heading = float(rng.uniform(-math.pi, math.pi))
    statics = _scatter_statics(rng, bounds, p["n_static"], [(start, p["clear_radius"])])
    chasers = []
    for k in range(p["n_chasers"]):
        pos = _free_spawn(rng, bounds, statics, start, min_start_dist=2.5)
        if pos is None:
            raise GenerationError("could not place chaser")
        chasers.append(
            Obstacle(
                id=2000 + k,
                shape=Circle(radius=0.3),
                height=float(rng.uniform(0.9, 1.7)),
                position=pos,
                behavior=SoftChase(speed_range=tuple(p["chaser_speed"])),
            )
        )
    world = _mk_world(bounds, statics + chasers, start, heading, spec.seed)
    return GeneratedScenario(spec, world, None, None, None, p["episode_s"])


def _maze_walls(
    rng: np.random.Generator, cw: int, ch: int, cell_m: float, t: float, h: float,
    extra_openings: int,
) -> tuple[list[Obstacle], Rect, set]:
    """Recursive-backtracker maze; walls as thin boxes, some removed for loops."""
    # passages[(cell, neighbor)] carved
    visited = np.zeros((ch, cw), dtype=bool)
    carved: set[tuple[int, int, int, int]] = set()
    stack = [(0, 0)]
    visited[0, 0] = True
    while stack:
        cy, cx = stack[-1]
        nbrs = []
        for dy, dx in ((0, 1), (0, -1), (1, 0), (-1, 0)):
            ny_, nx_ = cy + dy, cx + dx
            if 0 <= ny_ < ch and 0 <= nx_ < cw and not visited[ny_, nx_]:
                nbrs.append((ny_, nx_))
        if not nbrs:
            stack.pop()
            continue
        ny_, nx_ = nbrs[int(rng.integers(len(nbrs)))]
        carved.add((cy, cx, ny_, nx_))
        carved.add((ny_, nx_, cy, cx))
        visited[ny_, nx_] = True
        stack.append((ny_, nx_))

    # knock out a few interior walls so multiple feasible paths exist
    interior = [
        (cy, cx, cy + dy, cx + dx)
        for cy in range(ch)
        for cx in range(cw)
        for dy, dx in ((0, 1), (1, 0))
        if cy + dy < ch and cx + dx < cw and (cy, cx, cy + dy, cx + dx) not in carved
    ]
    if interior:
        picks = rng.choice(len(interior), size=min(extra_openings, len(interior)), replace=False)
        for idx in np.atleast_1d(picks):
            cy, cx, ny_, nx_ = interior[int(idx)]
            carved.add((cy, cx, ny_, nx_))
            carved.add((ny_, nx_, cy, cx))

    w = cw * cell_m
    hgt = ch * cell_m
    bounds = Rect(-w / 2, -hgt / 2, w / 2, hgt / 2)

    def center(cy, cx):
        return Vec2(bounds.xmin + (cx + 0.5) * cell_m, bounds.ymin + (cy + 0.5) * cell_m)

    walls: list[Obstacle] = []
    wid = 3000
    for cy in range(ch):
        for cx in range(cw):
            for dy, dx in ((0, 1), (1, 0)):
                ny_, nx_ = cy + dy, cx + dx
                if ny_ >= ch or nx_ >= cw:
                    continue
                if (cy, cx, ny_, nx_) in carved:
                    continue
                a = center(cy, cx)
                b = center(ny_, nx_)
                mid = Vec2(0.5 * (a.x + b.x), 0.5 * (a.y + b.y))
                if dx == 1:  # vertical wall
                    shape = Box(half_x=t / 2, half_y=cell_m / 2 + t / 2)
                else:  # horizontal wall
                    shape = Box(half_x=cell_m / 2 + t / 2, half_y=t / 2)
                walls.append(
                    Obstacle(id=wid, shape=shape, height=h, position=mid, behavior=Static())
                )
                wid += 1
    return walls, bounds, carved


def _dead_end_count(carved: set, cw: int, ch: int) -> int:
    deg = {}
    for cy in range(ch):
        for cx in range(cw):
            deg[(cy, cx)] = 0
    for (cy, cx, ny_, nx_) in carved:
        deg[(cy, cx)] += 1
    return sum(1 for v in deg.values() if v == 1)


def _gen_maze(spec: ScenarioSpec, p: dict, rng: np.random.Generator) -> GeneratedScenario:
    cw, ch = p["cells"]
    for _ in range(_MAX_ATTEMPTS):
        walls, bounds, carved = _maze_walls(
            rng, cw, ch, p["cell_m"], p["wall_thickness"], p["wall_height"],
            p["extra_openings"],
        )
        if _dead_end_count(carved, cw, ch) < 1:
            continue
        start = Vec2(
            bounds.xmin + (cw // 2 + 0.5) * p["cell_m"],
            bounds.ymin + (ch // 2 + 0.5) * p["cell_m"],
        )
        grid = build_occupancy(walls, bounds)
        if not grid.is_free(start):
            continue
        slo, shi = p["straight_range"]
        plo, phi = p["path_range"]
        goal_field = None
        cells = [(cy, cx) for cy in range(ch) for cx in range(cw)]
        order = rng.permutation(len(cells))
        for idx in order:
            cy, cx = cells[int(idx)]
            goal = Vec2(
                bounds.xmin + (cx + 0.5) * p["cell_m"],
                bounds.ymin + (cy + 0.5) * p["cell_m"],
            )
            straight = (goal - start).norm()
            if not (slo <= straight <= shi) or not grid.is_free(goal):
                continue
            fld = build_field(grid, goal)
            path_len = fld.cost_at(start)
            if plo <= path_len <= phi:
                goal_field = (goal, fld)
                break
        if goal_field is None:
            continue
        goal, fld = goal_field

        blockers = []
        if p["n_blockers"] > 0:
            open_pairs = sorted(
                {(min((a, b), (c, d)), max((a, b), (c, d))) for a, b, c, d in carved}
            )
            picks = rng.choice(
                len(open_pairs), size=min(p["n_blockers"], len(open_pairs)), replace=False
            )
            for j, idx in enumerate(np.atleast_1d(picks)):
                (ay, ax), (by, bx) = open_pairs[int(idx)]
                pa = Vec2(
                    bounds.xmin + (ax + 0.5) * p["cell_m"],
                    bounds.ymin + (ay + 0.5) * p["cell_m"],
                )
                pb = Vec2(
                    bounds.xmin + (bx + 0.5) * p["cell_m"],
                    bounds.ymin + (by + 0.5) * p["cell_m"],
                )
                if max((pa - start).norm(), (pb - start).norm()) < 1.0:
                    continue
                period = float(rng.uniform(*p["blocker_period"]))
                blockers.append(
                    Obstacle(
                        id=4000 + j,
                        shape=Circle(radius=0.3),
                        height=float(rng.uniform(0.9, 1.6)),
                        position=pa,
                        behavior=PeriodicBlocker(p0=pa, p1=pb, period=period),
                    )
                )
        heading = float(rng.uniform(-math.pi, math.pi))
        world = _mk_world(bounds, walls + blockers, start, heading, spec.seed)
        return GeneratedScenario(spec, world, goal, grid, fld, p["episode_s"])
    raise GenerationError(f"no feasible maze for seed {spec.seed}")


def _gen_hold(spec: ScenarioSpec, p: dict, rng: np.random.Generator) -> GeneratedScenario:
    half = p["size"] / 2.0
    bounds = Rect(-half, -half, half, half)
    start = Vec2(0.0, 0.0)
    lo, hi = p["n_crossers"]
    n = int(rng.integers(lo, hi + 1))
    obstacles = []
    for k in range(n):
        ang = float(rng.uniform(0, 2 * math.pi))
        direction = Vec2(math.cos(ang), math.sin(ang))
        span = float(rng.uniform(*p["span"]))
        speed = float(rng.uniform(*p["crosser_speed"]))
        side = 1.0 if rng.random() < 0.5 else -1.0
        offset = side * float(rng.uniform(1.5, span))
        obstacles.append(
            Obstacle(
                id=5000 + k,
                shape=Circle(radius=0.3),
                height=float(rng.uniform(0.9, 1.7)),
                position=start + direction * offset,
                behavior=CrossingPath(
                    anchor=start,
                    direction=direction,
                    speed=speed,
                    span=span,
                    offset=offset,
                    forward=offset < 0,
                ),
            )
        )
    heading = float(rng.uniform(-math.pi, math.pi))
    world = _mk_world(bounds, obstacles, start, heading, spec.seed)
    return GeneratedScenario(spec, world, None, None, None, p["episode_s"])


def generate(spec: ScenarioSpec) -> GeneratedScenario:
    """Build the world (plus goal and guidance field where applicable)."""
    p = _merged(spec)
    rng = rng_mod.stream(spec.seed, f"scenario/{spec.kind}")
    if spec.kind in ("scatter", "sca_sparse", "sca_dense"):
        return _gen_scatter(spec, p, rng)
    if spec.kind == "soft_chase":
        return _gen_soft_chase(spec, p, rng)
    if spec.kind in ("maze", "dymaze"):
        return _gen_maze(spec, p, rng)
    if spec.kind == "hold":
        return _gen_hold(spec, p, rng)
    raise InvalidInputError(f"unknown kind {spec.kind!r}")
