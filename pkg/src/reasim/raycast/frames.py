"""Depth images, ray scans, and the rolling frame history."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidInputError, WarmupError

MAX_RANGE = 3.0
N_RAYS = 180
SENSOR_HEIGHT = 0.4
ELEV_MIN_DEG = -7.0
ELEV_STEP_DEG = 2.0


@dataclass
class RayScan:
    """Horizontal distance rays covering 360 degrees in base-frame order.

    Ray i points along heading + i * (360/n) degrees. Distances are clipped
    to (0, max_range]; hit_ids and obstacle_velocities carry the privileged
    per-ray info used by the reward kernels.
    """

    distances: np.ndarray  # (n,) float64
    heading: float
    max_range: float = MAX_RANGE
    hit_ids: np.ndarray | None = None  # (n,) int64
    obstacle_velocities: np.ndarray | None = None  # (n,2) world frame
    _dirs: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.distances = np.asarray(self.distances, dtype=np.float64)
        if np.any(self.distances <= 0) or np.any(self.distances > self.max_range + 1e-12):
            raise InvalidInputError("ray distances must lie in (0, max_range]")

    @property
    def n(self) -> int:
        return self.distances.shape[0]

    def directions(self) -> np.ndarray:
        """Unit world-frame direction of each ray, (n, 2); cached."""
        if self._dirs is None:
            ang = self.heading + np.arange(self.n) * (2.0 * np.pi / self.n)
            self._dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        return self._dirs

    def normalized(self) -> np.ndarray:
        return self.distances / self.max_range


@dataclass
class DepthImage:
    """E x A closest-point spherical grid; empty cells hold max_range."""

    grid: np.ndarray  # (E, A)
    sensor_xyz: np.ndarray  # (3,)
    yaw: float
    max_range: float = MAX_RANGE

    @property
    def n_elev(self) -> int:
        return self.grid.shape[0]

    @property
    def n_azim(self) -> int:
        return self.grid.shape[1]


@dataclass
class FrameHistory:
    """Ring buffer of (DepthImage, 6-d proprio) pairs, oldest to newest."""

    horizon: int = 15
    dt: float = 0.02
    _frames: deque = field(default_factory=deque, repr=False)
    _times: deque = field(default_factory=deque, repr=False)

    def push(self, depth: DepthImage, proprio: np.ndarray, t: float) -> None:
        proprio = np.asarray(proprio, dtype=np.float64)
        if proprio.shape != (6,):
            raise InvalidInputError(f"proprio must be 6-d, got {proprio.shape}")
        if self._times and t <= self._times[-1]:
            raise InvalidInputError("frame timestamps must be strictly increasing")
        self._frames.append((depth, proprio))
        self._times.append(t)
        while len(self._frames) > self.horizon:
            self._frames.popleft()
            self._times.popleft()

    @property
    def warmed_up(self) -> bool:
        return len(self._frames) == self.horizon

    def __len__(self) -> int:
        return len(self._frames)

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(H, E, A) depth stack and (H, 6) proprio stack, oldest first."""
        if not self.warmed_up:
            raise WarmupError(
                f"history holds {len(self._frames)} of {self.horizon} frames"
            )
        depth = np.stack([f[0].grid for f in self._frames], axis=0)
        proprio = np.stack([f[1] for f in self._frames], axis=0)
        return depth, proprio

    def clear(self) -> None:
        self._frames.clear()
        self._times.clear()
