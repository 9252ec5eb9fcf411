"""Shared geometric types, the corridor world, and the fixed-timestep clock.

All value types are immutable; every other module builds on these.
Units are meters, seconds, radians throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi


def normalize_angle(theta: float) -> float:
    """Wrap an angle into (-pi, pi].

    The interval is open at -pi: normalize_angle(-pi) == pi.
    """
    if not math.isfinite(theta):
        raise ValueError(f"angle must be finite, got {theta!r}")
    wrapped = math.fmod(theta, TWO_PI)
    if wrapped > math.pi:
        wrapped -= TWO_PI
    elif wrapped <= -math.pi:
        wrapped += TWO_PI
    return wrapped


@dataclass(frozen=True)
class Pose2:
    """Planar position plus heading; position and orientation are independent."""

    x: float
    y: float
    heading: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("pose position must be finite")
        object.__setattr__(self, "heading", normalize_angle(self.heading))

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def distance_to(self, other: "Pose2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class Twist2:
    """Planar velocity command (vx, vy, omega).

    The frame (world or body) is declared wherever a Twist2 is used:
    RobotState carries a world-frame twist, navigator commands are body-frame.
    """

    vx: float
    vy: float
    omega: float

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in (self.vx, self.vy, self.omega)):
            raise ValueError("twist components must be finite")

    @property
    def linear(self) -> np.ndarray:
        return np.array([self.vx, self.vy])

    @property
    def speed(self) -> float:
        return math.hypot(self.vx, self.vy)

    @staticmethod
    def zero() -> "Twist2":
        return Twist2(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class KinematicLimits:
    """Base platform limits: 1.5 m/s translation, 1 rad/s rotation."""

    v_max: float = 1.5
    omega_max: float = 1.0
    a_max: float = 1.0
    alpha_max: float = 3.0

    def __post_init__(self) -> None:
        for name in ("v_max", "omega_max", "a_max", "alpha_max"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class Segment:
    """2-D line segment, used for walls and line-of-sight tests."""

    x1: float
    y1: float
    x2: float
    y2: float

    @property
    def p1(self) -> np.ndarray:
        return np.array([self.x1, self.y1])

    @property
    def p2(self) -> np.ndarray:
        return np.array([self.x2, self.y2])

    def closest_point(self, p: np.ndarray) -> np.ndarray:
        a, b = self.p1, self.p2
        ab = b - a
        denom = float(ab @ ab)
        if denom == 0.0:
            return a
        t = float((p - a) @ ab) / denom
        t = min(1.0, max(0.0, t))
        return a + t * ab

    def distance_to(self, p: np.ndarray) -> float:
        return float(np.linalg.norm(p - self.closest_point(p)))

    def intersects(self, other: "Segment") -> bool:
        """Proper segment-segment intersection (shared endpoints count)."""

        def orient(p, q, r) -> float:
            return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])

        p1, p2, q1, q2 = self.p1, self.p2, other.p1, other.p2
        d1 = orient(q1, q2, p1)
        d2 = orient(q1, q2, p2)
        d3 = orient(p1, p2, q1)
        d4 = orient(p1, p2, q2)
        if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
            return True

        def on_segment(p, q, r) -> bool:
            return (
                min(p[0], q[0]) - 1e-12 <= r[0] <= max(p[0], q[0]) + 1e-12
                and min(p[1], q[1]) - 1e-12 <= r[1] <= max(p[1], q[1]) + 1e-12
            )

        if d1 == 0 and on_segment(q1, q2, p1):
            return True
        if d2 == 0 and on_segment(q1, q2, p2):
            return True
        if d3 == 0 and on_segment(p1, p2, q1):
            return True
        if d4 == 0 and on_segment(p1, p2, q2):
            return True
        return False


@dataclass(frozen=True)
class Aisle:
    """One straight corridor: a centerline plus width.

    Provides the corridor frame used by the planner: axis position along the
    centerline and signed lateral offset (positive to the left of the axis
    direction start->end).
    """

    start: tuple[float, float]
    end: tuple[float, float]
    width: float

    @property
    def length(self) -> float:
        return math.hypot(self.end[0] - self.start[0], self.end[1] - self.start[1])

    @property
    def axis_direction(self) -> np.ndarray:
        d = np.array(self.end) - np.array(self.start)
        return d / np.linalg.norm(d)

    @property
    def normal(self) -> np.ndarray:
        ax = self.axis_direction
        return np.array([-ax[1], ax[0]])

    def axis_position(self, p: np.ndarray) -> float:
        return float((np.asarray(p) - np.array(self.start)) @ self.axis_direction)

    def lateral_offset(self, p: np.ndarray) -> float:
        return float((np.asarray(p) - np.array(self.start)) @ self.normal)

    def point_at(self, axis_pos: float, lateral: float) -> np.ndarray:
        return np.array(self.start) + axis_pos * self.axis_direction + lateral * self.normal

    def contains(self, p: np.ndarray, margin: float = 0.0) -> bool:
        s = self.axis_position(p)
        l = abs(self.lateral_offset(p))
        return -margin <= s <= self.length + margin and l <= self.width / 2.0 + margin

    def wall_segments(self) -> tuple[Segment, Segment]:
        h = self.width / 2.0
        a = self.point_at(0.0, h)
        b = self.point_at(self.length, h)
        c = self.point_at(0.0, -h)
        d = self.point_at(self.length, -h)
        return (
            Segment(a[0], a[1], b[0], b[1]),
            Segment(c[0], c[1], d[0], d[1]),
        )


@dataclass(frozen=True)
class CorridorWorld:
    """Static world: wall segments, the aisles they bound, agent radii, goals."""

    walls: tuple[Segment, ...]
    aisles: tuple[Aisle, ...]
    aisle_width: float = 0.95
    robot_radius: float = 0.27
    person_radius: float = 0.20
    goals: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        if self.aisle_width <= 2.0 * self.robot_radius:
            raise ValueError(
                f"aisle width {self.aisle_width} does not fit robot of radius {self.robot_radius}"
            )
        if not self.walls:
            raise ValueError("world must have at least one wall segment")

    def wall_distance(self, p: np.ndarray) -> float:
        return min(w.distance_to(np.asarray(p, dtype=float)) for w in self.walls)

    def nearest_aisle(self, p: np.ndarray) -> Aisle:
        if not self.aisles:
            raise ValueError("world has no aisles")
        p = np.asarray(p, dtype=float)

        def key(a: Aisle) -> float:
            s = min(max(a.axis_position(p), 0.0), a.length)
            return float(np.linalg.norm(a.point_at(s, 0.0) - p))

        return min(self.aisles, key=key)

    def line_of_sight(self, a: np.ndarray, b: np.ndarray) -> bool:
        ray = Segment(float(a[0]), float(a[1]), float(b[0]), float(b[1]))
        return not any(w.intersects(ray) for w in self.walls)


def point_to_wall_distance(p: Sequence[float], world: CorridorWorld) -> float:
    """Euclidean distance from a point to the nearest wall segment."""
    q = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(q)):
        raise ValueError("point must be finite")
    return world.wall_distance(q)


def single_aisle(length: float = 8.0, width: float = 0.95, robot_radius: float = 0.27,
                 person_radius: float = 0.20) -> CorridorWorld:
    """One straight aisle along +x with open ends, centerline on y=0."""
    aisle = Aisle(start=(0.0, 0.0), end=(length, 0.0), width=width)
    return CorridorWorld(
        walls=aisle.wall_segments(),
        aisles=(aisle,),
        aisle_width=width,
        robot_radius=robot_radius,
        person_radius=person_radius,
        goals=((0.3, 0.0), (length - 0.3, 0.0)),
    )


def two_aisle_shop(aisle_length: float = 8.0, width: float = 0.95, robot_radius: float = 0.27,
                   person_radius: float = 0.20) -> CorridorWorld:
    """Shop floor with two parallel aisles separated by a middle shelf block.

    The shelf block sits between the aisles, so there is no line of sight
    from one aisle to the other. Short circulation spaces connect the aisle
    ends outside [0, aisle_length].
    """
    w = width
    gap = 2.0 * w  # centerline separation between the two aisles
    a0 = Aisle(start=(0.0, 0.0), end=(aisle_length, 0.0), width=w)
    a1 = Aisle(start=(0.0, gap), end=(aisle_length, gap), width=w)
    shelf_lo = w / 2.0
    shelf_hi = gap - w / 2.0
    out_lo = -w / 2.0
    out_hi = gap + w / 2.0
    x0, x1 = -1.0, aisle_length + 1.0
    walls = (
        # outer boundary rectangle
        Segment(x0, out_lo, x1, out_lo),
        Segment(x1, out_lo, x1, out_hi),
        Segment(x1, out_hi, x0, out_hi),
        Segment(x0, out_hi, x0, out_lo),
        # middle shelf block
        Segment(0.0, shelf_lo, aisle_length, shelf_lo),
        Segment(aisle_length, shelf_lo, aisle_length, shelf_hi),
        Segment(aisle_length, shelf_hi, 0.0, shelf_hi),
        Segment(0.0, shelf_hi, 0.0, shelf_lo),
    )
    return CorridorWorld(
        walls=walls,
        aisles=(a0, a1),
        aisle_width=w,
        robot_radius=robot_radius,
        person_radius=person_radius,
        goals=((0.3, 0.0), (aisle_length - 0.3, 0.0), (0.3, gap), (aisle_length - 0.3, gap)),
    )


@dataclass(frozen=True)
class SimClock:
    """Fixed-timestep clock: physics substeps nested inside 10 Hz planner ticks."""

    tick_index: int = 0
    dt_physics: float = 0.01
    planner_period: float = 0.1

    def __post_init__(self) -> None:
        ratio = self.planner_period / self.dt_physics
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError("dt_physics must divide planner_period exactly")

    @property
    def substeps(self) -> int:
        return round(self.planner_period / self.dt_physics)

    @property
    def time(self) -> float:
        return self.tick_index * self.dt_physics

    def is_planner_tick(self) -> bool:
        return self.tick_index % self.substeps == 0

    def advanced(self) -> "SimClock":
        return SimClock(self.tick_index + 1, self.dt_physics, self.planner_period)


@dataclass(frozen=True)
class PathPoint:
    pose: Pose2


class Path:
    """Non-empty sequence of pose targets; first point is the pose at plan time."""

    def __init__(self, points: Sequence[PathPoint], at: Pose2):
        if not points:
            raise ValueError("path must be non-empty")
        first = points[0].pose
        if math.hypot(first.x - at.x, first.y - at.y) > 1e-9:
            raise ValueError("path must start at the current pose")
        self._points = tuple(points)

    @property
    def points(self) -> tuple[PathPoint, ...]:
        return self._points

    @property
    def final(self) -> Pose2:
        return self._points[-1].pose

    def __len__(self) -> int:
        return len(self._points)

    def __iter__(self):
        return iter(self._points)

    def __getitem__(self, i: int) -> PathPoint:
        return self._points[i]
