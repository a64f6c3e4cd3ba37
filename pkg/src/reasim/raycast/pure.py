"""Vectorized numpy ray backend.

Brute force over primitives, exact narrow phase. Serves as the import-time
fallback when the compiled kernels are unavailable and as the reference
the compiled backend is cross-checked against.
"""

from __future__ import annotations

import numpy as np

from .scene import GROUND_ID, NO_HIT_ID, SceneArrays

T_EPS = 1e-9
_PAR_EPS = 1e-14


def _ray_circles_2d(origin: np.ndarray, dirs: np.ndarray, circles: np.ndarray) -> np.ndarray:
    """Hit parameter per (ray, circle); inf for miss."""
    n = dirs.shape[0]
    if circles.shape[0] == 0:
        return np.full((n, 0), np.inf)
    oc = origin[None, :] - circles[:, 0:2]  # (K,2)
    b = dirs @ oc.T  # (N,K)
    c0 = np.einsum("kd,kd->k", oc, oc) - circles[:, 2] ** 2
    disc = b * b - c0[None, :]
    sq = np.sqrt(np.maximum(disc, 0.0))
    t1 = -b - sq
    t2 = -b + sq
    t = np.where(t1 > T_EPS, t1, np.where(t2 > T_EPS, t2, np.inf))
    return np.where(disc >= 0.0, t, np.inf)


def _slab(o, d, lo, hi, tmin, tmax):
    """Intersect slab lo <= axis <= hi into the running (tmin, tmax)."""
    small = np.abs(d) < _PAR_EPS
    safe = np.where(small, 1.0, d)
    t1 = (lo - o) / safe
    t2 = (hi - o) / safe
    a = np.minimum(t1, t2)
    b = np.maximum(t1, t2)
    inside = (o >= lo) & (o <= hi)
    a = np.where(small, np.where(inside, -np.inf, np.inf), a)
    b = np.where(small, np.where(inside, np.inf, -np.inf), b)
    return np.maximum(tmin, a), np.minimum(tmax, b)


def _pick_slab_t(tmin, tmax):
    t = np.where(tmin > T_EPS, tmin, tmax)
    ok = (tmax >= tmin) & (t > T_EPS)
    return np.where(ok, t, np.inf)


def _ray_boxes_2d(origin: np.ndarray, dirs: np.ndarray, boxes: np.ndarray) -> np.ndarray:
    n = dirs.shape[0]
    if boxes.shape[0] == 0:
        return np.full((n, 0), np.inf)
    c, s = boxes[:, 2], boxes[:, 3]
    rel = origin[None, :] - boxes[:, 0:2]
    ox = rel[:, 0] * c + rel[:, 1] * s  # (M,) local origin
    oy = -rel[:, 0] * s + rel[:, 1] * c
    dx = dirs[:, 0:1] * c[None, :] + dirs[:, 1:2] * s[None, :]  # (N,M)
    dy = -dirs[:, 0:1] * s[None, :] + dirs[:, 1:2] * c[None, :]
    hx, hy = boxes[:, 4], boxes[:, 5]
    tmin = np.full_like(dx, -np.inf)
    tmax = np.full_like(dx, np.inf)
    tmin, tmax = _slab(ox[None, :], dx, -hx[None, :], hx[None, :], tmin, tmax)
    tmin, tmax = _slab(oy[None, :], dy, -hy[None, :], hy[None, :], tmin, tmax)
    return _pick_slab_t(tmin, tmax)


def cast_rays_2d(
    origin: np.ndarray, dirs: np.ndarray, scene: SceneArrays, max_range: float
) -> tuple[np.ndarray, np.ndarray]:
    """Nearest hit distance and obstacle id per 2D ray; max_range on miss."""
    t_all = np.concatenate(
        [_ray_circles_2d(origin, dirs, scene.circles), _ray_boxes_2d(origin, dirs, scene.boxes)],
        axis=1,
    )
    ids = np.concatenate([scene.circle_ids, scene.box_ids])
    return _resolve(t_all, ids, max_range)


def _resolve(t_all: np.ndarray, ids: np.ndarray, max_range: float):
    n = t_all.shape[0]
    if t_all.shape[1] == 0:
        return np.full(n, max_range), np.full(n, NO_HIT_ID, dtype=np.int64)
    best = np.argmin(t_all, axis=1)
    t = t_all[np.arange(n), best]
    hit = t <= max_range
    dist = np.where(hit, t, max_range)
    hit_ids = np.where(hit, ids[best], NO_HIT_ID)
    return dist, hit_ids.astype(np.int64)


def _ray_circles_3d(origin, dirs, circles):
    n = dirs.shape[0]
    if circles.shape[0] == 0:
        return np.full((n, 0), np.inf)
    ox = origin[0] - circles[:, 0]  # (K,)
    oy = origin[1] - circles[:, 1]
    oz = origin[2]
    h = circles[:, 3]
    dx, dy, dz = dirs[:, 0:1], dirs[:, 1:2], dirs[:, 2:3]
    a = dx * dx + dy * dy  # (N,1)
    b = dx * ox[None, :] + dy * oy[None, :]
    c0 = ox * ox + oy * oy - circles[:, 2] ** 2
    disc = b * b - a * c0[None, :]
    sq = np.sqrt(np.maximum(disc, 0.0))
    a_safe = np.where(a < _PAR_EPS, 1.0, a)
    t1 = (-b - sq) / a_safe
    t2 = (-b + sq) / a_safe
    z1 = oz + t1 * dz
    z2 = oz + t2 * dz
    ok1 = (t1 > T_EPS) & (z1 >= 0.0) & (z1 <= h[None, :]) & (disc >= 0) & (a >= _PAR_EPS)
    ok2 = (t2 > T_EPS) & (z2 >= 0.0) & (z2 <= h[None, :]) & (disc >= 0) & (a >= _PAR_EPS)
    t_side = np.where(ok1, t1, np.where(ok2, t2, np.inf))
    # top cap at z = h
    dz_safe = np.where(np.abs(dz) < _PAR_EPS, 1.0, dz)
    t_cap = (h[None, :] - oz) / dz_safe
    px = ox[None, :] + t_cap * dx
    py = oy[None, :] + t_cap * dy
    in_disc = px * px + py * py <= circles[:, 2][None, :] ** 2
    ok_cap = (np.abs(dz) >= _PAR_EPS) & (t_cap > T_EPS) & in_disc
    t_cap = np.where(ok_cap, t_cap, np.inf)
    return np.minimum(t_side, t_cap)


def _ray_boxes_3d(origin, dirs, boxes):
    n = dirs.shape[0]
    if boxes.shape[0] == 0:
        return np.full((n, 0), np.inf)
    c, s = boxes[:, 2], boxes[:, 3]
    rel_x = origin[0] - boxes[:, 0]
    rel_y = origin[1] - boxes[:, 1]
    ox = rel_x * c + rel_y * s
    oy = -rel_x * s + rel_y * c
    dx = dirs[:, 0:1] * c[None, :] + dirs[:, 1:2] * s[None, :]
    dy = -dirs[:, 0:1] * s[None, :] + dirs[:, 1:2] * c[None, :]
    dz = dirs[:, 2:3] * np.ones_like(c)[None, :]
    hx, hy, h = boxes[:, 4], boxes[:, 5], boxes[:, 6]
    tmin = np.full_like(dx, -np.inf)
    tmax = np.full_like(dx, np.inf)
    tmin, tmax = _slab(ox[None, :], dx, -hx[None, :], hx[None, :], tmin, tmax)
    tmin, tmax = _slab(oy[None, :], dy, -hy[None, :], hy[None, :], tmin, tmax)
    oz = np.full_like(ox, origin[2])
    tmin, tmax = _slab(oz[None, :], dz, np.zeros_like(h)[None, :], h[None, :], tmin, tmax)
    return _pick_slab_t(tmin, tmax)


def cast_rays_3d(
    origin: np.ndarray,
    dirs: np.ndarray,
    scene: SceneArrays,
    max_range: float,
    ground: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """Nearest hit per 3D ray against prisms, cylinders, and the ground plane."""
    parts = [_ray_circles_3d(origin, dirs, scene.circles), _ray_boxes_3d(origin, dirs, scene.boxes)]
    ids = [scene.circle_ids, scene.box_ids]
    if ground:
        dz = dirs[:, 2]
        dz_safe = np.where(dz < -_PAR_EPS, dz, -1.0)
        t_g = np.where(dz < -_PAR_EPS, -origin[2] / dz_safe, np.inf)
        t_g = np.where(t_g > T_EPS, t_g, np.inf)
        parts.append(t_g[:, None])
        ids.append(np.array([GROUND_ID], dtype=np.int64))
    return _resolve(np.concatenate(parts, axis=1), np.concatenate(ids), max_range)


def downsample(
    points: np.ndarray,
    sensor_xyz: np.ndarray,
    yaw: float,
    n_elev: int,
    n_azim: int,
    elev_min: float,
    elev_step: float,
    max_range: float,
) -> np.ndarray:
    """Closest-point spherical binning; empty cells hold max_range. O(N)."""
    grid = np.full((n_elev, n_azim), max_range)
    if points.shape[0] == 0:
        return grid
    rel = points - sensor_xyz[None, :]
    c, s = np.cos(yaw), np.sin(yaw)
    x = rel[:, 0] * c + rel[:, 1] * s
    y = -rel[:, 0] * s + rel[:, 1] * c
    z = rel[:, 2]
    rng = np.sqrt(x * x + y * y + z * z)
    keep = rng > 1e-9
    x, y, z, rng = x[keep], y[keep], z[keep], rng[keep]
    elev = np.arcsin(np.clip(z / rng, -1.0, 1.0))
    ei = np.floor((elev - elev_min) / elev_step).astype(np.int64)
    ok = (ei >= 0) & (ei < n_elev)
    az = np.arctan2(y, x) % (2.0 * np.pi)
    az_step = 2.0 * np.pi / n_azim
    ai = (np.floor((az + az_step / 2.0) / az_step).astype(np.int64)) % n_azim
    np.minimum.at(grid, (ei[ok], ai[ok]), np.minimum(rng[ok], max_range))
    return grid
