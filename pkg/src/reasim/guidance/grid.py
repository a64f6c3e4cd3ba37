"""Occupancy grids inflated by the robot radius."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core.types import Box, Circle, Obstacle, Rect, Vec2


@dataclass
class OccupancyGrid:
    """Boolean grid over the world bounds; True cells are off limits.

    Inflation by the robot radius is applied exactly once, at build time:
    a cell is occupied when its center lies within the inflation radius of
    any static obstacle footprint or outside the inflated bounds.
    """

    cell_size: float
    origin: Vec2  # world position of the (0, 0) cell corner
    occupancy: np.ndarray  # (ny, nx) bool

    @property
    def nx(self) -> int:
        return self.occupancy.shape[1]

    @property
    def ny(self) -> int:
        return self.occupancy.shape[0]

    def cell_of(self, p: Vec2) -> tuple[int, int]:
        ix = int(np.floor((p.x - self.origin.x) / self.cell_size))
        iy = int(np.floor((p.y - self.origin.y) / self.cell_size))
        return iy, ix

    def in_grid(self, iy: int, ix: int) -> bool:
        return 0 <= iy < self.ny and 0 <= ix < self.nx

    def center_of(self, iy: int, ix: int) -> Vec2:
        return Vec2(
            self.origin.x + (ix + 0.5) * self.cell_size,
            self.origin.y + (iy + 0.5) * self.cell_size,
        )

    def is_free(self, p: Vec2) -> bool:
        iy, ix = self.cell_of(p)
        return self.in_grid(iy, ix) and not self.occupancy[iy, ix]


def build_occupancy(
    obstacles: list[Obstacle],
    bounds: Rect,
    cell_size: float = 0.1,
    inflate: float = 0.35,
    static_only: bool = True,
) -> OccupancyGrid:
    """Rasterize obstacle footprints inflated by the robot radius."""
    from ..core.behaviors import Static

    nx = int(np.ceil(bounds.width / cell_size))
    ny = int(np.ceil(bounds.height / cell_size))
    origin = Vec2(bounds.xmin, bounds.ymin)
    xs = bounds.xmin + (np.arange(nx) + 0.5) * cell_size
    ys = bounds.ymin + (np.arange(ny) + 0.5) * cell_size
    gx, gy = np.meshgrid(xs, ys)  # (ny, nx)

    occ = (
        (gx < bounds.xmin + inflate)
        | (gx > bounds.xmax - inflate)
        | (gy < bounds.ymin + inflate)
        | (gy > bounds.ymax - inflate)
    )
    for ob in obstacles:
        if static_only and not (ob.behavior is None or isinstance(ob.behavior, Static)):
            continue
        if isinstance(ob.shape, Circle):
            d2 = (gx - ob.position.x) ** 2 + (gy - ob.position.y) ** 2
            occ |= d2 <= (ob.shape.radius + inflate) ** 2
        elif isinstance(ob.shape, Box):
            c, s = np.cos(ob.angle), np.sin(ob.angle)
            rx = gx - ob.position.x
            ry = gy - ob.position.y
            lx = rx * c + ry * s
            ly = -rx * s + ry * c
            ddx = np.maximum(np.abs(lx) - ob.shape.half_x, 0.0)
            ddy = np.maximum(np.abs(ly) - ob.shape.half_y, 0.0)
            occ |= ddx * ddx + ddy * ddy <= inflate * inflate
    return OccupancyGrid(cell_size=cell_size, origin=origin, occupancy=occ)
