"""Backend selection: compiled kernels when available, numpy otherwise.

Set REASIM_PURE=1 to force the numpy path (useful for benchmarking and for
debugging suspected kernel issues).
"""

from __future__ import annotations

import os

import numpy as np

from . import pure
from .scene import GROUND_ID, SceneArrays

_kernels = None
if os.environ.get("REASIM_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:
        _kernels = None


def active_backend() -> str:
    return "compiled" if _kernels is not None else "pure"


def cast_2d(origin: np.ndarray, dirs: np.ndarray, scene: SceneArrays, max_range: float):
    if _kernels is not None:
        return _kernels.cast_2d(
            float(origin[0]),
            float(origin[1]),
            np.ascontiguousarray(dirs, dtype=np.float64),
            scene.circles,
            scene.circle_ids,
            scene.boxes,
            scene.box_ids,
            max_range,
        )
    return pure.cast_rays_2d(origin, dirs, scene, max_range)


def cast_3d(
    origin: np.ndarray,
    dirs: np.ndarray,
    scene: SceneArrays,
    max_range: float,
    ground: bool = True,
):
    if _kernels is not None:
        return _kernels.cast_3d(
            float(origin[0]),
            float(origin[1]),
            float(origin[2]),
            np.ascontiguousarray(dirs, dtype=np.float64),
            scene.circles,
            scene.circle_ids,
            scene.boxes,
            scene.box_ids,
            max_range,
            ground,
            GROUND_ID,
        )
    return pure.cast_rays_3d(origin, dirs, scene, max_range, ground)


def downsample(
    points: np.ndarray,
    sensor_xyz: np.ndarray,
    yaw: float,
    n_elev: int,
    n_azim: int,
    elev_min: float,
    elev_step: float,
    max_range: float,
):
    if _kernels is not None:
        return _kernels.downsample(
            np.ascontiguousarray(points, dtype=np.float64),
            float(sensor_xyz[0]),
            float(sensor_xyz[1]),
            float(sensor_xyz[2]),
            float(yaw),
            n_elev,
            n_azim,
            elev_min,
            elev_step,
            max_range,
        )
    return pure.downsample(
        points, sensor_xyz, yaw, n_elev, n_azim, elev_min, elev_step, max_range
    )
