"""Domain types for the kinematic world model."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

TWO_PI = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    a = a % TWO_PI
    if a > math.pi:
        a -= TWO_PI
    return a


@dataclass(frozen=True)
class Vec2:
    """Planar vector in meters (or m/s when used as a velocity)."""

    x: float
    y: float

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def __mul__(self, s: float) -> "Vec2":
        return Vec2(self.x * s, self.y * s)

    __rmul__ = __mul__

    def dot(self, other: "Vec2") -> float:
        return self.x * other.x + self.y * other.y

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def unit(self) -> "Vec2":
        """Unit vector; the zero vector maps to itself."""
        n = self.norm()
        if n == 0.0:
            return Vec2(0.0, 0.0)
        return Vec2(self.x / n, self.y / n)

    def rotated(self, angle: float) -> "Vec2":
        c, s = math.cos(angle), math.sin(angle)
        return Vec2(c * self.x - s * self.y, s * self.x + c * self.y)

    def is_finite(self) -> bool:
        return math.isfinite(self.x) and math.isfinite(self.y)

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class Twist:
    """Planar body twist: linear (vx, vy) in m/s and yaw rate wz in rad/s."""

    vx: float
    vy: float
    wz: float

    ZERO: "Twist" = None  # set below

    def linear(self) -> Vec2:
        return Vec2(self.vx, self.vy)

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in (self.vx, self.vy, self.wz))

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.vx, self.vy, self.wz)


Twist.ZERO = Twist(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle, used for world bounds and sampling regions."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def contains(self, p: Vec2) -> bool:
        return self.xmin <= p.x <= self.xmax and self.ymin <= p.y <= self.ymax

    def clamp(self, p: Vec2) -> Vec2:
        return Vec2(
            min(max(p.x, self.xmin), self.xmax),
            min(max(p.y, self.ymin), self.ymax),
        )

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    @property
    def center(self) -> Vec2:
        return Vec2(0.5 * (self.xmin + self.xmax), 0.5 * (self.ymin + self.ymax))

    def shrunk(self, margin: float) -> "Rect":
        return Rect(
            self.xmin + margin, self.ymin + margin, self.xmax - margin, self.ymax - margin
        )


@dataclass
class RobotState:
    """Disc robot: world-frame pose plus body-frame velocity."""

    position: Vec2
    heading: float  # rad, wrapped to (-pi, pi]
    body_velocity: Twist
    radius: float = 0.35

    def __post_init__(self) -> None:
        self.heading = wrap_angle(self.heading)
        if self.radius <= 0:
            raise ValueError(f"robot radius must be positive, got {self.radius}")

    def world_velocity(self) -> Vec2:
        """Linear velocity rotated into the world frame."""
        return self.body_velocity.linear().rotated(self.heading)


@dataclass(frozen=True)
class Circle:
    radius: float


@dataclass(frozen=True)
class Box:
    """Box given by half-extents; oriented by the owning obstacle's angle."""

    half_x: float
    half_y: float


Shape = Circle | Box


@dataclass
class Obstacle:
    """A vertical prism or cylinder standing on the ground plane."""

    id: int
    shape: Shape
    height: float
    position: Vec2
    angle: float = 0.0
    velocity: Vec2 = field(default_factory=lambda: Vec2(0.0, 0.0))
    behavior: "object" = None  # core.behaviors.Behavior; None means static

    def bounding_radius(self) -> float:
        if isinstance(self.shape, Circle):
            return self.shape.radius
        return math.hypot(self.shape.half_x, self.shape.half_y)


@dataclass(frozen=True)
class PlantConfig:
    """First-order velocity-tracking plant at a fixed control rate.

    Velocity limits are the locomotion envelope (2.5, 1.5, 3.0); commands
    beyond them are clamped before tracking.
    """

    dt: float = 0.02
    tracking_gain: tuple[float, float, float] = (5.0, 5.0, 5.0)  # 1/s
    accel_limits: tuple[float, float, float] = (8.0, 8.0, 20.0)  # m/s^2, rad/s^2
    velocity_limits: tuple[float, float, float] = (2.5, 1.5, 3.0)

    def clamp_twist(self, t: Twist) -> Twist:
        lx, ly, lw = self.velocity_limits
        return Twist(
            min(max(t.vx, -lx), lx),
            min(max(t.vy, -ly), ly),
            min(max(t.wz, -lw), lw),
        )
