"""Dijkstra guidance fields over occupancy grids.

Edge weights are cell_size for axial moves and sqrt(2)*cell_size for
diagonals, with no corner cutting past diagonally adjacent occupied cells.
Costs are tracked as integer (axial, diagonal) step counts so two builds
of the same field, or this build and an independently written oracle,
produce bitwise-identical float costs.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from ..core.types import Vec2
from ..errors import InvalidInputError
from .grid import OccupancyGrid

SQRT2 = math.sqrt(2.0)

# fixed neighbor order; ties in the direction argmin resolve to the
# smallest index here
NEIGHBORS = (
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
)


@dataclass
class GuidanceField:
    """Cost-to-goal surface plus a unit direction per cell.

    Unreachable cells carry infinite cost and a zero direction; the goal
    cell has zero cost and a zero direction.
    """

    grid: OccupancyGrid
    cost: np.ndarray  # (ny, nx) float64, meters, inf when unreachable
    direction: np.ndarray  # (ny, nx, 2) float32 unit or zero
    goal_cell: tuple[int, int]

    def sample(self, position: Vec2) -> Vec2:
        """Guiding direction of the containing cell (no interpolation)."""
        iy, ix = self.grid.cell_of(position)
        if not self.grid.in_grid(iy, ix):
            raise InvalidInputError(f"position {position} outside the field")
        dx, dy = self.direction[iy, ix]
        return Vec2(float(dx), float(dy))

    def cost_at(self, position: Vec2) -> float:
        iy, ix = self.grid.cell_of(position)
        if not self.grid.in_grid(iy, ix):
            raise InvalidInputError(f"position {position} outside the field")
        return float(self.cost[iy, ix])


def _diag_allowed(occ: np.ndarray, iy: int, ix: int, dy: int, dx: int) -> bool:
    return not (occ[iy, ix + dx] or occ[iy + dy, ix])


def build_field(grid: OccupancyGrid, goal: Vec2) -> GuidanceField:
    """Exact Dijkstra from the goal cell over the 8-connected free graph."""
    occ = grid.occupancy
    ny, nx = occ.shape
    gy, gx = grid.cell_of(goal)
    if not grid.in_grid(gy, gx):
        raise InvalidInputError(f"goal {goal} outside the grid")
    if occ[gy, gx]:
        raise InvalidInputError(f"goal {goal} lies in an occupied cell")

    na = np.full((ny, nx), -1, dtype=np.int32)  # axial step count
    nd = np.full((ny, nx), -1, dtype=np.int32)  # diagonal step count
    settled = np.zeros((ny, nx), dtype=bool)
    key = np.full((ny, nx), np.inf)

    na[gy, gx] = 0
    nd[gy, gx] = 0
    key[gy, gx] = 0.0
    heap: list[tuple[float, int, int, int, int]] = [(0.0, gy * nx + gx, 0, 0, gy * nx + gx)]
    # heap entries: (key, tie-break cell index, na, nd, cell)

    while heap:
        k, _, a, d, cell = heapq.heappop(heap)
        iy, ix = divmod(cell, nx)
        if settled[iy, ix] or k > key[iy, ix]:
            continue
        settled[iy, ix] = True
        for dy, dx in NEIGHBORS:
            jy, jx = iy + dy, ix + dx
            if not (0 <= jy < ny and 0 <= jx < nx) or occ[jy, jx]:
                continue
            diag = dy != 0 and dx != 0
            if diag and not _diag_allowed(occ, iy, ix, dy, dx):
                continue
            a2 = a + (0 if diag else 1)
            d2 = d + (1 if diag else 0)
            k2 = a2 + SQRT2 * d2
            if k2 < key[jy, jx]:
                key[jy, jx] = k2
                na[jy, jx] = a2
                nd[jy, jx] = d2
                heapq.heappush(heap, (k2, jy * nx + jx, a2, d2, jy * nx + jx))

    cost = np.where(
        na >= 0,
        grid.cell_size * (na.astype(np.float64) + SQRT2 * nd.astype(np.float64)),
        np.inf,
    )

    direction = np.zeros((ny, nx, 2), dtype=np.float32)
    unit = {
        (dy, dx): (
            dx / math.hypot(dx, dy),
            dy / math.hypot(dx, dy),
        )
        for dy, dx in NEIGHBORS
    }
    reach_y, reach_x = np.nonzero(na >= 0)
    for iy, ix in zip(reach_y, reach_x):
        if (iy, ix) == (gy, gx):
            continue
        best_key = key[iy, ix]
        best = None
        for dy, dx in NEIGHBORS:
            jy, jx = iy + dy, ix + dx
            if not (0 <= jy < ny and 0 <= jx < nx) or occ[jy, jx] or na[jy, jx] < 0:
                continue
            if dy != 0 and dx != 0 and not _diag_allowed(occ, iy, ix, dy, dx):
                continue
            if key[jy, jx] < best_key:
                best_key = key[jy, jx]
                best = (dy, dx)
        if best is not None:
            ux, uy = unit[best]
            direction[iy, ix, 0] = ux
            direction[iy, ix, 1] = uy

    return GuidanceField(grid=grid, cost=cost, direction=direction, goal_cell=(gy, gx))


def sample_guidance(field: GuidanceField, position: Vec2) -> Vec2:
    return field.sample(position)
