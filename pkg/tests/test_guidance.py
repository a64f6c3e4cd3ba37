"""Guidance-field tests against an independently written Dijkstra oracle.

The oracle tracks (axial, diagonal) step counts and settles cells with a
plain priority queue written from scratch here; costs must match the
library bit for bit because both evaluate cell_size * (na + sqrt(2) * nd)
from identical integer counts.
"""

import heapq
import math

import numpy as np
import pytest

from reasim.core import Box, Circle, Obstacle, Rect, Static, Vec2
from reasim.errors import GenerationError, InvalidInputError
from reasim.guidance import (
    GeneratedScenario,
    OccupancyGrid,
    ScenarioSpec,
    build_field,
    build_occupancy,
    generate,
    sample_guidance,
)

SQRT2 = math.sqrt(2.0)


def oracle_costs(occ: np.ndarray, goal: tuple[int, int], cell: float) -> np.ndarray:
    """Settle-based Dijkstra over the same 8-connected corner-safe graph."""
    ny, nx = occ.shape
    na = {goal: 0}
    nd = {goal: 0}
    done = set()
    heap = [(0.0, goal)]
    while heap:
        k, cur = heapq.heappop(heap)
        if cur in done:
            continue
        done.add(cur)
        cy, cx = cur
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                if dy == 0 and dx == 0:
                    continue
                jy, jx = cy + dy, cx + dx
                if not (0 <= jy < ny and 0 <= jx < nx) or occ[jy, jx]:
                    continue
                if dy != 0 and dx != 0 and (occ[cy, cx + dx] or occ[cy + dy, cx]):
                    continue
                a2 = na[cur] + (0 if dy and dx else 1)
                d2 = nd[cur] + (1 if dy and dx else 0)
                k2 = a2 + SQRT2 * d2
                old = (jy, jx) in na
                if not old or k2 < na[(jy, jx)] + SQRT2 * nd[(jy, jx)]:
                    na[(jy, jx)] = a2
                    nd[(jy, jx)] = d2
                    heapq.heappush(heap, (k2, (jy, jx)))
    out = np.full((ny, nx), np.inf)
    for (jy, jx), a in na.items():
        out[jy, jx] = cell * (float(a) + SQRT2 * float(nd[(jy, jx)]))
    return out


def grid_from_bool(occ: np.ndarray, cell: float = 0.1) -> OccupancyGrid:
    return OccupancyGrid(cell_size=cell, origin=Vec2(0.0, 0.0), occupancy=occ)


def test_empty_grid_points_at_center():
    occ = np.zeros((5, 5), dtype=bool)
    grid = grid_from_bool(occ, cell=1.0)
    goal = grid.center_of(2, 2)
    field = build_field(grid, goal)
    assert field.cost[2, 2] == 0.0
    assert np.allclose(field.direction[2, 2], 0.0)
    for iy in range(5):
        for ix in range(5):
            if (iy, ix) == (2, 2):
                continue
            d = field.direction[iy, ix]
            expect = np.array([np.sign(2 - ix), np.sign(2 - iy)], dtype=float)
            expect /= np.linalg.norm(expect)
            assert np.allclose(d, expect, atol=1e-6), (iy, ix, d, expect)


def test_goal_cell_zero_cost_zero_direction():
    occ = np.zeros((4, 6), dtype=bool)
    grid = grid_from_bool(occ)
    field = build_field(grid, grid.center_of(1, 3))
    assert field.cost[1, 3] == 0.0
    assert np.all(field.direction[1, 3] == 0.0)


def test_occupied_goal_rejected():
    occ = np.zeros((4, 4), dtype=bool)
    occ[2, 2] = True
    grid = grid_from_bool(occ, cell=1.0)
    with pytest.raises(InvalidInputError):
        build_field(grid, grid.center_of(2, 2))


def test_detour_costs_match_oracle_exactly():
    occ = np.zeros((20, 20), dtype=bool)
    occ[5:15, 10] = True  # wall requiring a detour
    grid = grid_from_bool(occ, cell=0.1)
    field = build_field(grid, grid.center_of(10, 15))
    expect = oracle_costs(occ, (10, 15), 0.1)
    assert np.array_equal(field.cost, expect)


def test_random_grids_match_oracle_exactly():
    rng = np.random.default_rng(11)
    for trial in range(15):
        occ = rng.random((24, 24)) < 0.28
        free = np.argwhere(~occ)
        goal = tuple(free[rng.integers(len(free))])
        grid = grid_from_bool(occ, cell=0.1)
        field = build_field(grid, grid.center_of(*goal))
        expect = oracle_costs(occ, goal, 0.1)
        assert np.array_equal(field.cost, expect), f"trial {trial}"


def test_direction_points_to_strictly_lower_cost():
    rng = np.random.default_rng(1)
    occ = rng.random((30, 30)) < 0.25
    free = np.argwhere(~occ)
    goal = tuple(free[0])
    grid = grid_from_bool(occ, cell=0.1)
    field = build_field(grid, grid.center_of(*goal))
    dirs = field.direction
    for iy, ix in np.argwhere(~occ):
        if (iy, ix) == goal or not np.isfinite(field.cost[iy, ix]):
            continue
        d = dirs[iy, ix]
        assert abs(np.linalg.norm(d) - 1.0) < 1e-6
        jx, jy = ix + round(float(d[0])), iy + round(float(d[1]))
        # the neighbor in the rounded unit direction has strictly lower cost
        assert field.cost[jy, jx] < field.cost[iy, ix]


def test_greedy_following_terminates_within_bound():
    rng = np.random.default_rng(5)
    occ = rng.random((30, 30)) < 0.25
    free = np.argwhere(~occ)
    goal = tuple(free[rng.integers(len(free))])
    grid = grid_from_bool(occ, cell=0.1)
    field = build_field(grid, grid.center_of(*goal))
    for iy, ix in np.argwhere(np.isfinite(field.cost) & ~occ):
        start_cost = field.cost[iy, ix]
        budget = int(start_cost / 0.1 * 1.01) + 2
        cy, cx = int(iy), int(ix)
        steps = 0
        while (cy, cx) != goal:
            d = field.direction[cy, cx]
            cx += round(float(d[0]))
            cy += round(float(d[1]))
            steps += 1
            assert steps <= budget, f"cycle from ({iy},{ix})"


def test_field_build_is_pure():
    occ = np.random.default_rng(3).random((15, 15)) < 0.3
    occ[7, 7] = False
    grid = grid_from_bool(occ)
    g = grid.center_of(7, 7)
    f1 = build_field(grid, g)
    f2 = build_field(grid, g)
    assert np.array_equal(f1.cost, f2.cost)
    assert np.array_equal(f1.direction, f2.direction)


def test_sample_guidance_contract():
    occ = np.zeros((10, 10), dtype=bool)
    grid = grid_from_bool(occ, cell=0.5)
    field = build_field(grid, grid.center_of(5, 5))
    rng = np.random.default_rng(0)
    for _ in range(1000):
        p = Vec2(float(rng.uniform(0, 5)), float(rng.uniform(0, 5)))
        v = sample_guidance(field, p)
        n = v.norm()
        assert n == pytest.approx(1.0, abs=1e-6) or n == 0.0
    with pytest.raises(InvalidInputError):
        sample_guidance(field, Vec2(100.0, 0.0))
    # corridor: straight segment points along the corridor axis
    occ2 = np.ones((5, 9), dtype=bool)
    occ2[2, :] = False
    grid2 = grid_from_bool(occ2, cell=0.5)
    field2 = build_field(grid2, grid2.center_of(2, 8))
    v = field2.sample(grid2.center_of(2, 2))
    assert v.x == pytest.approx(1.0)
    assert v.y == pytest.approx(0.0)


def test_occupancy_inflation_once():
    ob = Obstacle(id=0, shape=Circle(0.3), height=1.0, position=Vec2(0.0, 0.0),
                  behavior=Static())
    grid = build_occupancy([ob], Rect(-2, -2, 2, 2), cell_size=0.1, inflate=0.35)
    # cells within 0.65 m of the center are occupied, outside are free
    assert grid.occupancy[grid.cell_of(Vec2(0.0, 0.55))]
    assert not grid.occupancy[grid.cell_of(Vec2(0.0, 0.8))]
    # bounds are inflated too
    assert grid.occupancy[grid.cell_of(Vec2(1.9, 0.0))]


class TestGenerate:
    def test_scatter_reproducible_and_goal_within_limit(self):
        a = generate(ScenarioSpec(kind="scatter", seed=5, scale="paper"))
        b = generate(ScenarioSpec(kind="scatter", seed=5, scale="paper"))
        assert (a.goal - b.goal).norm() == 0.0
        assert len(a.world.obstacles) == len(b.world.obstacles)
        for o1, o2 in zip(a.world.obstacles, b.world.obstacles):
            assert (o1.position - o2.position).norm() == 0.0
        assert (a.goal - a.world.robot.position).norm() <= 7.0

    def test_maze_paper_scale_constraints(self):
        gen = generate(ScenarioSpec(kind="maze", seed=2, scale="paper"))
        straight = (gen.goal - gen.world.robot.position).norm()
        path = gen.field.cost_at(gen.world.robot.position)
        assert 5.0 <= straight <= 7.0
        assert 5.0 <= path <= 15.0

    def test_hold_paths_pass_through_start(self):
        gen = generate(ScenarioSpec(kind="hold", seed=9))
        start = gen.world.robot.position
        assert 2 <= len(gen.world.obstacles) <= 4
        for ob in gen.world.obstacles:
            beh = ob.behavior
            # distance from the start to the obstacle's path line
            rel = start - beh.anchor
            cross = abs(rel.x * beh.direction.y - rel.y * beh.direction.x)
            assert cross <= 0.1

    def test_generated_goals_always_reachable(self):
        for seed in range(8):
            for kind in ("scatter", "sca_sparse", "sca_dense", "maze", "dymaze"):
                gen = generate(ScenarioSpec(kind=kind, seed=seed))
                assert math.isfinite(gen.field.cost_at(gen.world.robot.position)), (
                    kind,
                    seed,
                )

    def test_soft_chase_stage_counts(self):
        gen = generate(ScenarioSpec(kind="soft_chase", seed=1, params={"n_chasers": 3}))
        from reasim.core import SoftChase

        chasers = [ob for ob in gen.world.obstacles if isinstance(ob.behavior, SoftChase)]
        assert len(chasers) == 3

    def test_unknown_parameter_rejected(self):
        with pytest.raises(InvalidInputError):
            generate(ScenarioSpec(kind="scatter", seed=0, params={"bogus": 1}))
