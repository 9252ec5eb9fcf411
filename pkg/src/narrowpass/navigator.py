"""Path head to velocity commands: a modified PID with x-y coupling.

A single scalar PID acts on the distance to the target point and the command
is directed straight at it, so x and y stay coupled and the tracked line is
straight. The integral term only activates near goals; a braking envelope
keeps approaches within the acceleration limit; an emergency stop zeroes the
command near obstacles. Output always passes through the kinematic clamp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import KinematicLimits, Path, Pose2, Twist2, normalize_angle
from .kinematics import RobotState, clamp_command

WAYPOINT_TOLERANCE = 0.15  # intermediate path points count as reached inside this


@dataclass(frozen=True)
class NavigatorGains:
    kp_lin: float = 1.2
    ki_lin: float = 0.3
    kd_lin: float = 0.1
    kp_ang: float = 2.0
    integral_gate_radius: float = 0.5
    stop_distance: float = 0.45
    goal_tolerance: float = 0.05
    heading_tolerance: float = 0.05
    v_cruise: Optional[float] = None  # optional speed cap below v_max

    def __post_init__(self) -> None:
        for name in ("kp_lin", "ki_lin", "kd_lin", "kp_ang"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.stop_distance <= 0 or self.goal_tolerance <= 0:
            raise ValueError("distances must be positive")


@dataclass(frozen=True)
class Obstacle:
    position: np.ndarray
    radius: float


def _target_point(path: Path, robot: RobotState, gains: NavigatorGains) -> Pose2:
    """First path point not yet reached; the last one is always a candidate."""
    pos = robot.position
    for point in path.points[:-1]:
        d = float(np.linalg.norm(point.pose.position - pos))
        if d > WAYPOINT_TOLERANCE:
            return point.pose
    return path.final


def goal_reached(path: Path, robot: RobotState, gains: NavigatorGains) -> bool:
    """At the final path point, position and orientation both within tolerance."""
    if len(path) == 0:
        raise ValueError("path must be non-empty")
    final = path.final
    d = float(np.linalg.norm(final.position - robot.position))
    heading_err = abs(normalize_angle(final.heading - robot.pose.heading))
    return d < gains.goal_tolerance and heading_err < gains.heading_tolerance


class Navigator:
    """Stateful command generator; one instance per scenario run.

    Holds the integral accumulator and the goal-hold latch; reset() on
    planner episode transitions.
    """

    def __init__(self, gains: NavigatorGains, limits: KinematicLimits):
        self.gains = gains
        self.limits = limits
        self._integral = 0.0
        self._holding = False

    def reset(self) -> None:
        self._integral = 0.0
        self._holding = False

    def command(self, path: Path, robot: RobotState,
                obstacles: Sequence[Obstacle], dt: float) -> Twist2:
        """Velocity command toward the current path target, limit-clamped."""
        if len(path) == 0:
            raise ValueError("path must be non-empty")
        if dt <= 0:
            raise ValueError("dt must be positive")
        g = self.gains
        current_body = robot.body_twist()

        # emergency stop: freeze translation near obstacles; rotation may
        # continue because the round footprint occupies the same space at
        # any heading
        stopped = any(
            float(np.linalg.norm(ob.position - robot.position)) <= g.stop_distance
            for ob in obstacles)

        target = _target_point(path, robot, g)
        to_target = target.position - robot.position
        distance = float(np.linalg.norm(to_target))
        is_final = target is path.final

        # goal-hold hysteresis: once converged, stay put until pushed out 10%
        if is_final:
            if self._holding and distance < 1.1 * g.goal_tolerance:
                distance_effective = 0.0
            elif distance < g.goal_tolerance:
                self._holding = True
                distance_effective = 0.0
            else:
                self._holding = False
                distance_effective = distance
        else:
            self._holding = False
            distance_effective = distance

        if distance_effective <= 0.0:
            v_mag = 0.0
            self._integral = 0.0
        else:
            if distance < g.integral_gate_radius:
                self._integral += distance * dt
                self._integral = min(self._integral, 1.0)
            else:
                self._integral = 0.0
            speed = robot.twist.speed
            v_mag = (g.kp_lin * distance
                     + g.ki_lin * self._integral
                     - g.kd_lin * speed)
            if is_final:
                # braking envelope: never faster than a_max can stop in time
                brake = math.sqrt(2.0 * self.limits.a_max
                                  * max(distance - g.goal_tolerance, 0.0))
                v_mag = min(v_mag, brake)
            v_mag = min(v_mag, self.limits.v_max)
            if g.v_cruise is not None:
                v_mag = min(v_mag, g.v_cruise)
            v_mag = max(v_mag, 0.0)

        if stopped:
            v_mag = 0.0
            self._integral = 0.0
        if distance > 1e-12 and v_mag > 0.0:
            direction = to_target / distance
        else:
            direction = np.zeros(2)
        desired_world = v_mag * direction

        heading_err = normalize_angle(target.heading - robot.pose.heading)
        if abs(heading_err) < g.heading_tolerance and v_mag == 0.0 and is_final:
            omega = 0.0
        else:
            omega = g.kp_ang * heading_err

        c = math.cos(robot.pose.heading)
        s = math.sin(robot.pose.heading)
        desired_body = Twist2(
            c * desired_world[0] + s * desired_world[1],
            -s * desired_world[0] + c * desired_world[1],
            omega,
        )
        return clamp_command(desired_body, current_body, self.limits, dt)
