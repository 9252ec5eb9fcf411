"""Omni-directional base model: limit clamping and exact state integration.

Commands are body-frame twists; RobotState keeps the world-frame twist.
Integration uses the closed-form constant-twist arc so traces are
deterministic and substep-invariant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import KinematicLimits, Pose2, Twist2, normalize_angle

_LIMIT_SLACK = 1e-9


@dataclass(frozen=True)
class RobotState:
    """Robot pose plus its current world-frame twist."""

    pose: Pose2
    twist: Twist2
    limits: KinematicLimits

    def __post_init__(self) -> None:
        if self.twist.speed > self.limits.v_max + 1e-6:
            raise ValueError("robot speed exceeds v_max")
        if abs(self.twist.omega) > self.limits.omega_max + 1e-6:
            raise ValueError("robot angular rate exceeds omega_max")

    @property
    def position(self) -> np.ndarray:
        return self.pose.position

    def body_twist(self) -> Twist2:
        """Current twist expressed in the body frame."""
        c = math.cos(self.pose.heading)
        s = math.sin(self.pose.heading)
        vx = c * self.twist.vx + s * self.twist.vy
        vy = -s * self.twist.vx + c * self.twist.vy
        return Twist2(vx, vy, self.twist.omega)

    @staticmethod
    def at_rest(pose: Pose2, limits: KinematicLimits) -> "RobotState":
        return RobotState(pose, Twist2.zero(), limits)


def clamp_command(desired: Twist2, current: Twist2, limits: KinematicLimits,
                  dt: float) -> Twist2:
    """Clamp a desired twist to velocity and acceleration limits.

    Both twists must be in the same frame. Linear velocity is clamped as a
    vector (magnitude to v_max, change from `current` to a_max*dt); the
    angular component is clamped independently.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if not all(math.isfinite(v) for v in (desired.vx, desired.vy, desired.omega)):
        raise ValueError("desired twist must be finite")

    lin = desired.linear
    speed = float(np.linalg.norm(lin))
    if speed > limits.v_max:
        lin = lin * (limits.v_max / speed)

    dv = lin - current.linear
    dv_norm = float(np.linalg.norm(dv))
    max_dv = limits.a_max * dt
    if dv_norm > max_dv:
        lin = current.linear + dv * (max_dv / dv_norm)

    omega = min(limits.omega_max, max(-limits.omega_max, desired.omega))
    d_omega = omega - current.omega
    max_dw = limits.alpha_max * dt
    if abs(d_omega) > max_dw:
        omega = current.omega + math.copysign(max_dw, d_omega)

    return Twist2(float(lin[0]), float(lin[1]), omega)


def integrate(state: RobotState, command: Twist2, dt: float) -> RobotState:
    """Advance the robot by one step under a constant body-frame twist.

    The command must already satisfy the limits (clamp_command output).
    Uses the exact arc solution, so the result does not depend on substep
    size.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if command.speed > state.limits.v_max + 1e-6:
        raise ValueError("command exceeds v_max; clamp it first")
    if abs(command.omega) > state.limits.omega_max + 1e-6:
        raise ValueError("command exceeds omega_max; clamp it first")

    th0 = state.pose.heading
    w = command.omega
    vx, vy = command.vx, command.vy
    if abs(w) < 1e-12:
        dx_b = vx * dt
        dy_b = vy * dt
    else:
        swt = math.sin(w * dt)
        cwt = math.cos(w * dt)
        dx_b = (vx * swt + vy * (cwt - 1.0)) / w
        dy_b = (vx * (1.0 - cwt) + vy * swt) / w
    c0, s0 = math.cos(th0), math.sin(th0)
    x = state.pose.x + c0 * dx_b - s0 * dy_b
    y = state.pose.y + s0 * dx_b + c0 * dy_b
    heading = normalize_angle(th0 + w * dt)

    c1, s1 = math.cos(heading), math.sin(heading)
    world_twist = Twist2(c1 * vx - s1 * vy, s1 * vx + c1 * vy, w)
    return RobotState(Pose2(x, y, heading), world_twist, state.limits)
