"""Flattening of a WorldState into primitive arrays for the ray kernels.

World bounds become four thin wall boxes whose inner faces lie exactly on
the bound lines, so rays inside the arena measure the true distance to the
boundary. Walls carry the reserved id WALL_ID and zero velocity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core.types import Box, Circle, Obstacle, Rect

WALL_ID = -2
GROUND_ID = -3
NO_HIT_ID = -1

WALL_THICKNESS = 0.1
DEFAULT_WALL_HEIGHT = 2.0


@dataclass
class SceneArrays:
    """Primitive soup consumed by both ray backends."""

    circles: np.ndarray  # (K, 4) cx, cy, radius, height
    circle_ids: np.ndarray  # (K,) int64
    circle_vels: np.ndarray  # (K, 2)
    boxes: np.ndarray  # (M, 7) cx, cy, cos, sin, hx, hy, height
    box_ids: np.ndarray  # (M,) int64
    box_vels: np.ndarray  # (M, 2)
    _id_order: np.ndarray | None = None
    _sorted_ids: np.ndarray | None = None

    def velocity_of(self, hit_id: int) -> tuple[float, float]:
        if hit_id < 0:
            return (0.0, 0.0)
        idx = np.nonzero(self.circle_ids == hit_id)[0]
        if idx.size:
            vx, vy = self.circle_vels[idx[0]]
            return (float(vx), float(vy))
        idx = np.nonzero(self.box_ids == hit_id)[0]
        if idx.size:
            vx, vy = self.box_vels[idx[0]]
            return (float(vx), float(vy))
        return (0.0, 0.0)

    def velocities_for(self, hit_ids: np.ndarray) -> np.ndarray:
        """Per-ray obstacle velocity (world frame); zeros for walls/misses."""
        out = np.zeros((hit_ids.shape[0], 2))
        if self.circle_ids.size + self.box_ids.size == 0:
            return out
        if self._id_order is None:
            all_ids = np.concatenate([self.circle_ids, self.box_ids])
            self._id_order = np.argsort(all_ids, kind="stable")
            self._sorted_ids = all_ids[self._id_order]
        all_vels = np.concatenate(
            [self.circle_vels.reshape(-1, 2), self.box_vels.reshape(-1, 2)], axis=0
        )
        pos = np.searchsorted(self._sorted_ids, hit_ids)
        pos_c = np.clip(pos, 0, self._sorted_ids.size - 1)
        found = self._sorted_ids[pos_c] == hit_ids
        out[found] = all_vels[self._id_order[pos_c[found]]]
        return out


def _wall_boxes(bounds: Rect, wall_height: float) -> list[tuple]:
    w = WALL_THICKNESS
    cx, cy = bounds.center.x, bounds.center.y
    hx = bounds.width / 2.0 + w
    hy = bounds.height / 2.0 + w
    return [
        (bounds.xmin - w / 2.0, cy, 1.0, 0.0, w / 2.0, hy, wall_height),
        (bounds.xmax + w / 2.0, cy, 1.0, 0.0, w / 2.0, hy, wall_height),
        (cx, bounds.ymin - w / 2.0, 1.0, 0.0, hx, w / 2.0, wall_height),
        (cx, bounds.ymax + w / 2.0, 1.0, 0.0, hx, w / 2.0, wall_height),
    ]


def flatten_scene(
    obstacles: list[Obstacle],
    bounds: Rect | None = None,
    min_height: float = 0.0,
    wall_height: float = DEFAULT_WALL_HEIGHT,
) -> SceneArrays:
    """Build primitive arrays, keeping only obstacles at least min_height tall."""
    circ, circ_ids, circ_vel = [], [], []
    boxes, box_ids, box_vel = [], [], []
    for ob in obstacles:
        if ob.height < min_height:
            continue
        if isinstance(ob.shape, Circle):
            circ.append((ob.position.x, ob.position.y, ob.shape.radius, ob.height))
            circ_ids.append(ob.id)
            circ_vel.append((ob.velocity.x, ob.velocity.y))
        elif isinstance(ob.shape, Box):
            boxes.append(
                (
                    ob.position.x,
                    ob.position.y,
                    np.cos(ob.angle),
                    np.sin(ob.angle),
                    ob.shape.half_x,
                    ob.shape.half_y,
                    ob.height,
                )
            )
            box_ids.append(ob.id)
            box_vel.append((ob.velocity.x, ob.velocity.y))
    if bounds is not None and wall_height >= min_height:
        for wall in _wall_boxes(bounds, wall_height):
            boxes.append(wall)
            box_ids.append(WALL_ID)
            box_vel.append((0.0, 0.0))
    return SceneArrays(
        circles=np.asarray(circ, dtype=np.float64).reshape(-1, 4),
        circle_ids=np.asarray(circ_ids, dtype=np.int64),
        circle_vels=np.asarray(circ_vel, dtype=np.float64).reshape(-1, 2),
        boxes=np.asarray(boxes, dtype=np.float64).reshape(-1, 7),
        box_ids=np.asarray(box_ids, dtype=np.int64),
        box_vels=np.asarray(box_vel, dtype=np.float64).reshape(-1, 2),
    )
