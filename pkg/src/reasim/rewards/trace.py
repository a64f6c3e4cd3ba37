"""Per-term reward traces recomputed from replay logs.

Replay records carry distances only, so ray-based terms assume static
obstacles (zero obstacle velocity); collision and navigation terms need
world state absent from the log and are not traced.
"""

from __future__ import annotations

import csv

import numpy as np

from ..core.types import Twist, Vec2
from ..raycast.frames import RayScan
from .kernels import r_limit, r_over, r_smooth, r_track, r_vel, ShieldRewardInput


def trace_replay(records: list[dict]) -> list[tuple[int, str, float]]:
    rows: list[tuple[int, str, float]] = []
    prev_safe = [Twist.ZERO, Twist.ZERO]
    for rec in records:
        tick = rec["tick"]
        if rec.get("cmd_nav") is None or rec.get("cmd_safe") is None:
            continue
        cmd = Twist(*rec["cmd_nav"])
        safe = Twist(*rec["cmd_safe"])
        actual = Twist(*rec["robot"]["body_velocity"])
        heading = rec["robot"]["heading"]
        rows.append((tick, "track", r_track(cmd, actual)))
        rows.append((tick, "smooth", r_smooth(safe, prev_safe[0], prev_safe[1])))
        rows.append((tick, "limit", r_limit(safe)))
        if rec.get("rays"):
            rays = RayScan(
                distances=np.asarray(rec["rays"], dtype=np.float64),
                heading=heading,
            )
            v_world = actual.linear().rotated(heading)
            rows.append((tick, "vel", r_vel(rays, v_world)))
            inp = ShieldRewardInput(
                cmd=cmd,
                actual=actual,
                actions=(safe, prev_safe[0], prev_safe[1]),
                rays=rays,
                robot_velocity_world=v_world,
                cmd_velocity_world=cmd.linear().rotated(heading),
                collisions=0,
            )
            rows.append((tick, "over", r_over(inp)))
        prev_safe = [safe, prev_safe[0]]
    return rows


def write_trace_csv(rows: list[tuple[int, str, float]], path: str) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["tick", "term", "value"])
        for tick, term, value in rows:
            w.writerow([tick, term, f"{value:.8f}"])
