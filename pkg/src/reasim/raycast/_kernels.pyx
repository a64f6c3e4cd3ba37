# cython: language_level=3
"""Compiled ray kernels.

A uniform spatial hash over primitive AABBs is rebuilt per call (the scene
changes every tick), then each ray walks the grid with an Amanatides-Woo
DDA, running the exact narrow phase only on primitives stored in visited
cells and stopping once the next cell starts beyond the best hit so far.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport asin, atan2, cos, fabs, floor, fmax, fmin, sin, sqrt

cnp.import_array()

cdef double T_EPS = 1e-9
cdef double PAR_EPS = 1e-14
cdef double INF = float("inf")
cdef double CELL = 1.0

BACKEND_NAME = "compiled"


# ---------------------------------------------------------------- narrow phase

cdef inline double _circle_2d(double ox, double oy, double dx, double dy,
                              double cx, double cy, double r):
    cdef double rx = ox - cx
    cdef double ry = oy - cy
    cdef double b = dx * rx + dy * ry
    cdef double c0 = rx * rx + ry * ry - r * r
    cdef double disc = b * b - c0
    if disc < 0.0:
        return INF
    cdef double sq = sqrt(disc)
    cdef double t = -b - sq
    if t > T_EPS:
        return t
    t = -b + sq
    if t > T_EPS:
        return t
    return INF


cdef inline bint _slab1(double o, double d, double lo, double hi,
                        double* tmin, double* tmax):
    cdef double t1, t2, tmp
    if fabs(d) < PAR_EPS:
        return o >= lo and o <= hi
    t1 = (lo - o) / d
    t2 = (hi - o) / d
    if t1 > t2:
        tmp = t1; t1 = t2; t2 = tmp
    if t1 > tmin[0]:
        tmin[0] = t1
    if t2 < tmax[0]:
        tmax[0] = t2
    return True


cdef inline double _box_2d(double ox, double oy, double dx, double dy,
                           double cx, double cy, double cth, double sth,
                           double hx, double hy):
    cdef double rx = ox - cx
    cdef double ry = oy - cy
    cdef double lox = rx * cth + ry * sth
    cdef double loy = -rx * sth + ry * cth
    cdef double ldx = dx * cth + dy * sth
    cdef double ldy = -dx * sth + dy * cth
    cdef double tmin = -INF
    cdef double tmax = INF
    if not _slab1(lox, ldx, -hx, hx, &tmin, &tmax):
        return INF
    if not _slab1(loy, ldy, -hy, hy, &tmin, &tmax):
        return INF
    if tmax < tmin:
        return INF
    cdef double t = tmin if tmin > T_EPS else tmax
    return t if t > T_EPS else INF


cdef inline double _circle_3d(double ox, double oy, double oz,
                              double dx, double dy, double dz,
                              double cx, double cy, double r, double h):
    cdef double rx = ox - cx
    cdef double ry = oy - cy
    cdef double a = dx * dx + dy * dy
    cdef double b = dx * rx + dy * ry
    cdef double c0 = rx * rx + ry * ry - r * r
    cdef double best = INF
    cdef double disc, sq, t, z, px, py
    if a >= PAR_EPS:
        disc = b * b - a * c0
        if disc >= 0.0:
            sq = sqrt(disc)
            t = (-b - sq) / a
            z = oz + t * dz
            if t > T_EPS and z >= 0.0 and z <= h:
                best = t
            else:
                t = (-b + sq) / a
                z = oz + t * dz
                if t > T_EPS and z >= 0.0 and z <= h:
                    best = t
    if fabs(dz) >= PAR_EPS:
        t = (h - oz) / dz
        if t > T_EPS and t < best:
            px = rx + t * dx
            py = ry + t * dy
            if px * px + py * py <= r * r:
                best = t
    return best


cdef inline double _box_3d(double ox, double oy, double oz,
                           double dx, double dy, double dz,
                           double cx, double cy, double cth, double sth,
                           double hx, double hy, double h):
    cdef double rx = ox - cx
    cdef double ry = oy - cy
    cdef double lox = rx * cth + ry * sth
    cdef double loy = -rx * sth + ry * cth
    cdef double ldx = dx * cth + dy * sth
    cdef double ldy = -dx * sth + dy * cth
    cdef double tmin = -INF
    cdef double tmax = INF
    if not _slab1(lox, ldx, -hx, hx, &tmin, &tmax):
        return INF
    if not _slab1(loy, ldy, -hy, hy, &tmin, &tmax):
        return INF
    if not _slab1(oz, dz, 0.0, h, &tmin, &tmax):
        return INF
    if tmax < tmin:
        return INF
    cdef double t = tmin if tmin > T_EPS else tmax
    return t if t > T_EPS else INF


# ---------------------------------------------------------------- spatial hash

cdef _build_hash(double[:, ::1] circles, double[:, ::1] boxes,
                 double ox, double oy, double max_range):
    """CSR cell -> primitive-index lists over a uniform grid."""
    cdef int K = circles.shape[0]
    cdef int M = boxes.shape[0]
    cdef int n = K + M
    aabb_np = np.empty((max(n, 1), 4))
    cdef double[:, ::1] ab = aabb_np
    cdef int i
    cdef double ex, ey, cth, sth
    cdef double lo_x = ox - max_range
    cdef double hi_x = ox + max_range
    cdef double lo_y = oy - max_range
    cdef double hi_y = oy + max_range
    for i in range(K):
        ab[i, 0] = circles[i, 0] - circles[i, 2]
        ab[i, 1] = circles[i, 1] - circles[i, 2]
        ab[i, 2] = circles[i, 0] + circles[i, 2]
        ab[i, 3] = circles[i, 1] + circles[i, 2]
    for i in range(M):
        cth = boxes[i, 2]; sth = boxes[i, 3]
        ex = fabs(cth) * boxes[i, 4] + fabs(sth) * boxes[i, 5]
        ey = fabs(sth) * boxes[i, 4] + fabs(cth) * boxes[i, 5]
        ab[K + i, 0] = boxes[i, 0] - ex
        ab[K + i, 1] = boxes[i, 1] - ey
        ab[K + i, 2] = boxes[i, 0] + ex
        ab[K + i, 3] = boxes[i, 1] + ey
    for i in range(n):
        lo_x = fmin(lo_x, ab[i, 0]); hi_x = fmax(hi_x, ab[i, 2])
        lo_y = fmin(lo_y, ab[i, 1]); hi_y = fmax(hi_y, ab[i, 3])
    cdef double gx0 = lo_x - CELL
    cdef double gy0 = lo_y - CELL
    cdef int nx = <int>floor((hi_x - gx0) / CELL) + 2
    cdef int ny = <int>floor((hi_y - gy0) / CELL) + 2

    counts_np = np.zeros(nx * ny + 1, dtype=np.int32)
    cdef int[::1] counts = counts_np
    cdef int x0, x1, y0, y1, cx_, cy_
    for i in range(n):
        x0 = _clamp(<int>floor((ab[i, 0] - gx0) / CELL), nx)
        x1 = _clamp(<int>floor((ab[i, 2] - gx0) / CELL), nx)
        y0 = _clamp(<int>floor((ab[i, 1] - gy0) / CELL), ny)
        y1 = _clamp(<int>floor((ab[i, 3] - gy0) / CELL), ny)
        for cy_ in range(y0, y1 + 1):
            for cx_ in range(x0, x1 + 1):
                counts[cy_ * nx + cx_ + 1] += 1
    start_np = np.cumsum(counts_np, dtype=np.int32)
    cdef int[::1] start = start_np
    items_np = np.empty(int(start_np[-1]), dtype=np.int32)
    cdef int[::1] items = items_np
    fill_np = start_np[:-1].copy()
    cdef int[::1] fill = fill_np
    cdef int cell
    for i in range(n):
        x0 = _clamp(<int>floor((ab[i, 0] - gx0) / CELL), nx)
        x1 = _clamp(<int>floor((ab[i, 2] - gx0) / CELL), nx)
        y0 = _clamp(<int>floor((ab[i, 1] - gy0) / CELL), ny)
        y1 = _clamp(<int>floor((ab[i, 3] - gy0) / CELL), ny)
        for cy_ in range(y0, y1 + 1):
            for cx_ in range(x0, x1 + 1):
                cell = cy_ * nx + cx_
                items[fill[cell]] = i
                fill[cell] += 1
    return gx0, gy0, nx, ny, start_np, items_np


cdef inline int _clamp(int i, int n):
    if i < 0:
        return 0
    if i >= n:
        return n - 1
    return i


cdef void _walk(double gx0, double gy0, int nx, int ny,
                int[::1] cell_start, int[::1] items, int[::1] stamp, int cur,
                double ox, double oy, double dx, double dy, double t_cap,
                double oz, double dz,
                double[:, ::1] circles, double[:, ::1] boxes,
                bint three_d, double* best_t, int* best_i):
    """DDA over the hash grid. (dx, dy) is the horizontal direction part;
    for 3D rays t stays the 3D parameter because (dx, dy, dz) is unit."""
    cdef int K = circles.shape[0]
    best_t[0] = INF
    best_i[0] = -1

    cdef double t0 = 0.0
    cdef double t1 = t_cap
    cdef double gx1 = gx0 + nx * CELL
    cdef double gy1 = gy0 + ny * CELL
    cdef double tmin = -INF
    cdef double tmax = INF
    cdef double hlen2 = dx * dx + dy * dy
    cdef int ix, iy, step_x, step_y
    cdef double px, py, t_max_x, t_max_y, t_dx, t_dy, edge
    cdef int cell, a, b0, j, item
    cdef double t

    if hlen2 < PAR_EPS * PAR_EPS:
        # vertical ray: only the origin cell can matter
        ix = _clamp(<int>floor((ox - gx0) / CELL), nx)
        iy = _clamp(<int>floor((oy - gy0) / CELL), ny)
        cell = iy * nx + ix
        for j in range(cell_start[cell], cell_start[cell + 1]):
            item = items[j]
            t = _narrow(item, K, ox, oy, dx, dy, oz, dz, circles, boxes, three_d)
            if t < best_t[0]:
                best_t[0] = t
                best_i[0] = item
        return

    if not _slab1(ox, dx, gx0, gx1, &tmin, &tmax):
        return
    if not _slab1(oy, dy, gy0, gy1, &tmin, &tmax):
        return
    if tmax < tmin:
        return
    if tmin > t0:
        t0 = tmin
    if tmax < t1:
        t1 = tmax
    if t0 > t1:
        return

    px = ox + dx * t0
    py = oy + dy * t0
    ix = _clamp(<int>floor((px - gx0) / CELL), nx)
    iy = _clamp(<int>floor((py - gy0) / CELL), ny)
    step_x = 1 if dx > 0 else (-1 if dx < 0 else 0)
    step_y = 1 if dy > 0 else (-1 if dy < 0 else 0)
    t_max_x = INF
    t_max_y = INF
    t_dx = INF
    t_dy = INF
    if step_x != 0:
        edge = gx0 + (ix + (1 if step_x > 0 else 0)) * CELL
        t_max_x = t0 + (edge - px) / dx
        t_dx = CELL / fabs(dx)
    if step_y != 0:
        edge = gy0 + (iy + (1 if step_y > 0 else 0)) * CELL
        t_max_y = t0 + (edge - py) / dy
        t_dy = CELL / fabs(dy)

    while True:
        cell = iy * nx + ix
        for j in range(cell_start[cell], cell_start[cell + 1]):
            item = items[j]
            if stamp[item] == cur:
                continue
            stamp[item] = cur
            t = _narrow(item, K, ox, oy, dx, dy, oz, dz, circles, boxes, three_d)
            if t < best_t[0]:
                best_t[0] = t
                best_i[0] = item
        if t_max_x < t_max_y:
            if t_max_x > t1 or t_max_x >= best_t[0]:
                return
            t_max_x += t_dx
            ix += step_x
            if ix < 0 or ix >= nx:
                return
        else:
            if t_max_y > t1 or t_max_y >= best_t[0]:
                return
            t_max_y += t_dy
            iy += step_y
            if iy < 0 or iy >= ny:
                return


cdef inline double _narrow(int item, int K,
                           double ox, double oy, double dx, double dy,
                           double oz, double dz,
                           double[:, ::1] circles, double[:, ::1] boxes,
                           bint three_d):
    if three_d:
        if item < K:
            return _circle_3d(ox, oy, oz, dx, dy, dz,
                              circles[item, 0], circles[item, 1],
                              circles[item, 2], circles[item, 3])
        return _box_3d(ox, oy, oz, dx, dy, dz,
                       boxes[item - K, 0], boxes[item - K, 1],
                       boxes[item - K, 2], boxes[item - K, 3],
                       boxes[item - K, 4], boxes[item - K, 5],
                       boxes[item - K, 6])
    if item < K:
        return _circle_2d(ox, oy, dx, dy, circles[item, 0],
                          circles[item, 1], circles[item, 2])
    return _box_2d(ox, oy, dx, dy,
                   boxes[item - K, 0], boxes[item - K, 1],
                   boxes[item - K, 2], boxes[item - K, 3],
                   boxes[item - K, 4], boxes[item - K, 5])


# --------------------------------------------------------------- entry points

def cast_2d(double ox, double oy, double[:, ::1] dirs,
            double[:, ::1] circles, cnp.int64_t[::1] circle_ids,
            double[:, ::1] boxes, cnp.int64_t[::1] box_ids,
            double max_range):
    cdef int n = dirs.shape[0]
    cdef int K = circles.shape[0]
    dist_np = np.full(n, max_range)
    ids_np = np.full(n, -1, dtype=np.int64)
    cdef double[::1] dist = dist_np
    cdef cnp.int64_t[::1] ids = ids_np
    gx0, gy0, nx, ny, start_np, items_np = _build_hash(circles, boxes, ox, oy, max_range)
    cdef int[::1] cell_start = start_np
    cdef int[::1] items = items_np
    stamp_np = np.full(max(K + boxes.shape[0], 1), -1, dtype=np.int32)
    cdef int[::1] stamp = stamp_np
    cdef double bt
    cdef int bi, i
    for i in range(n):
        _walk(gx0, gy0, nx, ny, cell_start, items, stamp, i,
              ox, oy, dirs[i, 0], dirs[i, 1], max_range,
              0.0, 0.0, circles, boxes, False, &bt, &bi)
        if bt <= max_range:
            dist[i] = bt
            ids[i] = circle_ids[bi] if bi < K else box_ids[bi - K]
    return dist_np, ids_np


def cast_3d(double ox, double oy, double oz, double[:, ::1] dirs,
            double[:, ::1] circles, cnp.int64_t[::1] circle_ids,
            double[:, ::1] boxes, cnp.int64_t[::1] box_ids,
            double max_range, bint ground, cnp.int64_t ground_id):
    cdef int n = dirs.shape[0]
    cdef int K = circles.shape[0]
    dist_np = np.full(n, max_range)
    ids_np = np.full(n, -1, dtype=np.int64)
    cdef double[::1] dist = dist_np
    cdef cnp.int64_t[::1] ids = ids_np
    gx0, gy0, nx, ny, start_np, items_np = _build_hash(circles, boxes, ox, oy, max_range)
    cdef int[::1] cell_start = start_np
    cdef int[::1] items = items_np
    stamp_np = np.full(max(K + boxes.shape[0], 1), -1, dtype=np.int32)
    cdef int[::1] stamp = stamp_np
    cdef double bt, tg, dz
    cdef int bi, i
    for i in range(n):
        _walk(gx0, gy0, nx, ny, cell_start, items, stamp, i,
              ox, oy, dirs[i, 0], dirs[i, 1], max_range,
              oz, dirs[i, 2], circles, boxes, True, &bt, &bi)
        if ground:
            dz = dirs[i, 2]
            if dz < -PAR_EPS:
                tg = -oz / dz
                if tg > T_EPS and tg < bt:
                    bt = tg
                    bi = -2  # ground marker, resolved below
        if bt <= max_range:
            dist[i] = bt
            if bi == -2:
                ids[i] = ground_id
            else:
                ids[i] = circle_ids[bi] if bi < K else box_ids[bi - K]
    return dist_np, ids_np


def downsample(double[:, ::1] points, double sx, double sy, double sz,
               double yaw, int n_elev, int n_azim, double elev_min,
               double elev_step, double max_range):
    grid_np = np.full((n_elev, n_azim), max_range)
    cdef double[:, ::1] grid = grid_np
    cdef int n = points.shape[0]
    cdef double c = cos(yaw)
    cdef double s = sin(yaw)
    cdef double az_step = 2.0 * np.pi / n_azim
    cdef double two_pi = 2.0 * np.pi
    cdef double x, y, z, rx, ry, rng, elev, az
    cdef int i, ei, ai
    for i in range(n):
        rx = points[i, 0] - sx
        ry = points[i, 1] - sy
        z = points[i, 2] - sz
        x = rx * c + ry * s
        y = -rx * s + ry * c
        rng = sqrt(x * x + y * y + z * z)
        if rng <= 1e-9:
            continue
        elev = asin(fmin(fmax(z / rng, -1.0), 1.0))
        ei = <int>floor((elev - elev_min) / elev_step)
        if ei < 0 or ei >= n_elev:
            continue
        az = atan2(y, x)
        if az < 0:
            az += two_pi
        ai = (<int>floor((az + az_step / 2.0) / az_step)) % n_azim
        if rng > max_range:
            rng = max_range
        if rng < grid[ei, ai]:
            grid[ei, ai] = rng
    return grid_np
