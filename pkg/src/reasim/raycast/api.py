"""Ray casting operations over a WorldState."""

from __future__ import annotations

import numpy as np

from ..core.types import Vec2
from ..core.world import WorldState
from ..errors import InvalidInputError
from .backend import cast_2d, cast_3d, downsample
from .frames import (
    ELEV_MIN_DEG,
    ELEV_STEP_DEG,
    MAX_RANGE,
    N_RAYS,
    SENSOR_HEIGHT,
    DepthImage,
    RayScan,
)
from .scene import SceneArrays, flatten_scene


def cast_rays(
    world: WorldState,
    directions: np.ndarray,
    origin: Vec2,
    max_range: float = MAX_RANGE,
    scene: SceneArrays | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Nearest hit distance and obstacle id for each 2D ray.

    Directions must be unit vectors; misses return max_range with id -1,
    wall hits return WALL_ID.
    """
    directions = np.asarray(directions, dtype=np.float64).reshape(-1, 2)
    norms = np.hypot(directions[:, 0], directions[:, 1])
    if np.any(norms < 1e-12):
        raise InvalidInputError("zero-length ray direction")
    if np.any(np.abs(norms - 1.0) > 1e-9):
        raise InvalidInputError("ray directions must be unit vectors")
    if scene is None:
        scene = flatten_scene(world.obstacles, world.bounds)
    origin_arr = np.array([origin.x, origin.y])
    return cast_2d(origin_arr, directions, scene, max_range)


class ScanContext:
    """Per-episode scene cache: static rows flattened once, moving rows
    rewritten in place each tick."""

    def __init__(self, world: WorldState, sensor_height: float = SENSOR_HEIGHT):
        from ..core.behaviors import Static
        from ..core.types import Box, Circle

        self.scene = flatten_scene(world.obstacles, world.bounds, min_height=sensor_height)
        self._dyn_circles: list[tuple[int, object]] = []
        self._dyn_boxes: list[tuple[int, object]] = []
        ci = bi = 0
        for ob in world.obstacles:
            if ob.height < sensor_height:
                continue
            moving = not (ob.behavior is None or isinstance(ob.behavior, Static))
            if isinstance(ob.shape, Circle):
                if moving:
                    self._dyn_circles.append((ci, ob))
                ci += 1
            elif isinstance(ob.shape, Box):
                if moving:
                    self._dyn_boxes.append((bi, ob))
                bi += 1

    def refresh(self) -> SceneArrays:
        sc = self.scene
        for i, ob in self._dyn_circles:
            sc.circles[i, 0] = ob.position.x
            sc.circles[i, 1] = ob.position.y
            sc.circle_vels[i, 0] = ob.velocity.x
            sc.circle_vels[i, 1] = ob.velocity.y
        for i, ob in self._dyn_boxes:
            sc.boxes[i, 0] = ob.position.x
            sc.boxes[i, 1] = ob.position.y
            sc.boxes[i, 2] = np.cos(ob.angle)
            sc.boxes[i, 3] = np.sin(ob.angle)
            sc.box_vels[i, 0] = ob.velocity.x
            sc.box_vels[i, 1] = ob.velocity.y
        return sc


def ground_truth_rays(
    world: WorldState,
    n_rays: int = N_RAYS,
    max_range: float = MAX_RANGE,
    sensor_height: float = SENSOR_HEIGHT,
    ctx: ScanContext | None = None,
) -> RayScan:
    """Horizontal rays at sensor height in base-frame order.

    Obstacles shorter than the sensor height are invisible to the scan
    even though they still collide with the robot disc.
    """
    heading = world.robot.heading
    ang = heading + np.arange(n_rays) * (2.0 * np.pi / n_rays)
    dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    scene = (
        ctx.refresh()
        if ctx is not None
        else flatten_scene(world.obstacles, world.bounds, min_height=sensor_height)
    )
    origin = np.array([world.robot.position.x, world.robot.position.y])
    dist, ids = cast_2d(origin, dirs, scene, max_range)
    vels = scene.velocities_for(ids)
    return RayScan(
        distances=np.maximum(dist, 1e-6),
        heading=heading,
        max_range=max_range,
        hit_ids=ids,
        obstacle_velocities=vels,
    )


def scan_lidar(
    world: WorldState,
    pattern: np.ndarray,
    sensor_height: float = SENSOR_HEIGHT,
    max_range: float = MAX_RANGE,
    noise: float = 0.0,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Simulated spherical scan: one world-frame 3D point per ray that hits.

    The pattern is given in the sensor frame and rotated by the robot
    heading. Optional uniform range noise in [-noise, +noise] is applied
    before clipping ranges into [1e-3, max_range].
    """
    heading = world.robot.heading
    c, s = np.cos(heading), np.sin(heading)
    dirs = np.empty_like(pattern)
    dirs[:, 0] = pattern[:, 0] * c - pattern[:, 1] * s
    dirs[:, 1] = pattern[:, 0] * s + pattern[:, 1] * c
    dirs[:, 2] = pattern[:, 2]
    origin = np.array(
        [world.robot.position.x, world.robot.position.y, sensor_height]
    )
    scene = flatten_scene(world.obstacles, world.bounds)
    dist, ids = cast_3d(origin, dirs, scene, max_range, ground=True)
    hit = ids != -1
    ranges = dist[hit]
    if noise > 0.0:
        if rng is None:
            raise InvalidInputError("noise requires an rng")
        ranges = ranges + rng.uniform(-noise, noise, size=ranges.shape)
    ranges = np.clip(ranges, 1e-3, max_range)
    return origin[None, :] + dirs[hit] * ranges[:, None]


def downsample_spherical(
    points: np.ndarray,
    sensor_xyz: np.ndarray,
    yaw: float,
    n_elev: int,
    n_azim: int,
    elev_min_deg: float = ELEV_MIN_DEG,
    elev_step_deg: float = ELEV_STEP_DEG,
    max_range: float = MAX_RANGE,
) -> DepthImage:
    """Closest-point spherical grid of a point cloud around the sensor."""
    if n_elev < 1 or n_azim < 1:
        raise InvalidInputError("grid must have at least one cell")
    grid = downsample(
        np.asarray(points, dtype=np.float64).reshape(-1, 3),
        np.asarray(sensor_xyz, dtype=np.float64),
        yaw,
        n_elev,
        n_azim,
        np.deg2rad(elev_min_deg),
        np.deg2rad(elev_step_deg),
        max_range,
    )
    return DepthImage(
        grid=grid, sensor_xyz=np.asarray(sensor_xyz, dtype=np.float64), yaw=yaw,
        max_range=max_range,
    )


def depth_frame(
    world: WorldState,
    n_elev: int,
    n_azim: int,
    pattern: np.ndarray,
    sensor_height: float = SENSOR_HEIGHT,
    max_range: float = MAX_RANGE,
    noise: float = 0.0,
    rng: np.random.Generator | None = None,
) -> DepthImage:
    """Scan and downsample in one step (the estimator's per-tick input)."""
    points = scan_lidar(world, pattern, sensor_height, max_range, noise, rng)
    sensor = np.array([world.robot.position.x, world.robot.position.y, sensor_height])
    return downsample_spherical(
        points, sensor, world.robot.heading, n_elev, n_azim, max_range=max_range
    )
