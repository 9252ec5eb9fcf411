"""Independent brute-force oracles used by the verification suite.

These deliberately avoid the closed-form implementations they check:
integration is re-done with fine explicit-Euler substeps, crossing times by
stepping two constant-velocity points, traversal time from the ideal
speed profile.
"""

from __future__ import annotations

import math

import numpy as np

from .core import Pose2, Twist2


def euler_integrate_twist(pose: Pose2, twist: Twist2, dt: float,
                          substeps: int = 100_000) -> Pose2:
    """Explicit-Euler integration of a constant body-frame twist."""
    h = dt / substeps
    theta = pose.heading + twist.omega * h * np.arange(substeps)
    c = np.cos(theta)
    s = np.sin(theta)
    dx = h * (twist.vx * c - twist.vy * s)
    dy = h * (twist.vx * s + twist.vy * c)
    x = pose.x + float(np.sum(dx))
    y = pose.y + float(np.sum(dy))
    heading = pose.heading + twist.omega * dt
    return Pose2(x, y, heading)


def fine_crossing_time(robot_pos, robot_vel, person_pos, person_vel,
                       dt: float = 1e-4, horizon: float = 30.0) -> float:
    """Time of minimum distance between two constant-velocity points.

    Stepped simulation; returns the first time the distance stops
    decreasing (or `horizon` if it never does).
    """
    r = np.asarray(robot_pos, dtype=float)
    p = np.asarray(person_pos, dtype=float)
    vr = np.asarray(robot_vel, dtype=float)
    vp = np.asarray(person_vel, dtype=float)
    prev = float(np.linalg.norm(p - r))
    t = 0.0
    while t < horizon:
        t += dt
        d = float(np.linalg.norm((p + vp * t) - (r + vr * t)))
        if d > prev:
            return t - dt
        prev = d
    return horizon


def trapezoid_traversal_time(distance: float, v_max: float, a_max: float,
                             stop_tolerance: float = 0.0) -> float:
    """Ideal accelerate-cruise-brake profile time over `distance`.

    The run ends when the remaining distance equals `stop_tolerance`
    (matching a goal-tolerance arrival test).
    """
    d = distance - stop_tolerance
    if d <= 0:
        return 0.0
    d_ramp = v_max * v_max / (2.0 * a_max)
    if d <= 2.0 * d_ramp:
        # triangular profile
        v_peak = math.sqrt(a_max * d)
        return 2.0 * v_peak / a_max
    t_ramp = v_max / a_max
    t_cruise = (d - 2.0 * d_ramp) / v_max
    return 2.0 * t_ramp + t_cruise


def relaxation_speed(desired_speed: float, tau: float, elapsed: float) -> float:
    """Closed-form speed of the goal-relaxation term from rest."""
    return desired_speed * (1.0 - math.exp(-elapsed / tau))


def fine_relaxation_speed(desired_speed: float, tau: float, elapsed: float,
                          substeps: int = 100_000) -> float:
    """Fine-step integration of v' = (v_d - v)/tau from rest."""
    h = elapsed / substeps
    v = 0.0
    for _ in range(substeps):
        v += h * (desired_speed - v) / tau
    return v
