"""Simulated humans: a social-force walker plus scripted corridor behaviours.

The social-force model combines goal-directed velocity relaxation with
exponential repulsion from the robot and the walls. Scripted behaviours
reproduce edge cases: exact timed waypoints, and a blocker that mirrors the
robot's side to force the stop-and-yield interaction.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .core import CorridorWorld
from .kinematics import RobotState

log = logging.getLogger(__name__)

SPEED_CAP_FACTOR = 1.3  # hard cap relative to desired speed
ARRIVAL_RADIUS = 0.25   # stop pushing toward the goal inside this radius


class Behaviour(Enum):
    SOCIAL_FORCE = "social_force"
    SCRIPTED_WAYPOINTS = "waypoints"
    SAME_SIDE_BLOCKER = "same_side_blocker"


@dataclass(frozen=True)
class SocialForceParams:
    """Relaxation time and repulsion shape; defaults give natural single-person
    corridor walking and are simulation parameters, not measured values.

    Wall repulsion is much shorter-ranged than agent repulsion: walls only
    need to keep the walker off the surface, while a long-range wall term in
    a sub-meter corridor pins the walker to the centerline and prevents it
    from yielding sideways at all.
    """

    tau: float = 0.5       # s
    repulsion_gain: float = 2.0   # m/s^2, agent (robot) repulsion
    repulsion_range: float = 0.3  # m
    wall_gain: float = 2.0        # m/s^2, wall repulsion
    wall_range: float = 0.05      # m
    # oncoming-traffic lane keeping: like the robot, a walker notices the
    # oncoming party a few meters out and aims for a pass lane near the wall
    pass_engage_distance: float = 4.0  # m
    pass_lookahead: float = 0.8        # m ahead of the walker
    pass_wall_margin: float = 0.02     # m kept free between shoulder and wall
    # boundary-layer damping of the wall-normal velocity; stops momentum
    # from carrying the walker through the thin repulsion shell into contact
    wall_damping: float = 12.0         # 1/s
    wall_damping_layer: float = 0.06   # m

    def __post_init__(self) -> None:
        if self.tau <= 0 or self.repulsion_gain < 0 or self.repulsion_range <= 0:
            raise ValueError("invalid social force parameters")
        if self.wall_gain < 0 or self.wall_range <= 0:
            raise ValueError("invalid wall repulsion parameters")
        if self.wall_damping < 0 or self.wall_damping_layer <= 0:
            raise ValueError("invalid wall damping parameters")


@dataclass(frozen=True)
class BlockerScript:
    """Tuning for the same-side blocker: mirror the robot's side, stand off
    when close, then pass on the free side."""

    engage_distance: float = 1.0   # start of the stand-off
    dwell_time: float = 1.0        # how long it waits before yielding
    lateral_rate: float = 0.8      # m/s lateral adjustment speed
    mirror_offset: float = 0.18    # target |lateral| while mirroring
    pass_speed: float = 1.0        # forward speed while passing


@dataclass
class PedestrianState:
    position: np.ndarray
    velocity: np.ndarray
    goal: np.ndarray
    desired_speed: float = 1.2
    radius: float = 0.20
    behaviour: Behaviour = Behaviour.SOCIAL_FORCE
    params: SocialForceParams = field(default_factory=SocialForceParams)
    # scripted-behaviour state
    waypoints: tuple[tuple[float, float, float], ...] = ()  # (t, x, y)
    script: BlockerScript = field(default_factory=BlockerScript)
    phase: str = "approach"           # approach | standoff | passing
    phase_time: float = 0.0
    pass_side: float = 0.0            # lateral sign committed for the pass
    yield_side: float = 0.0           # social-force lane latch; 0 = none
    elapsed: float = 0.0
    wall_fallback_count: int = 0

    def __post_init__(self) -> None:
        self.position = np.asarray(self.position, dtype=float)
        self.velocity = np.asarray(self.velocity, dtype=float)
        self.goal = np.asarray(self.goal, dtype=float)
        if not 0.0 < self.desired_speed <= 2.5:
            raise ValueError("desired_speed must be in (0, 2.5]")
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    @property
    def speed(self) -> float:
        return float(np.linalg.norm(self.velocity))

    def copy(self) -> "PedestrianState":
        c = replace(self)
        c.position = self.position.copy()
        c.velocity = self.velocity.copy()
        c.goal = self.goal.copy()
        return c


def _repulsion(away: np.ndarray, distance: float, r_sum: float,
               gain: float, rng: float) -> np.ndarray:
    mag = gain * math.exp((r_sum - distance) / rng)
    return mag * away


def _update_yield_side(ped: PedestrianState, robot: Optional[RobotState],
                       world: CorridorWorld) -> float:
    """Latch a pass lane when the robot is ahead and close; clear it after
    the robot falls behind. Returns the current lane sign (0 = none)."""
    if robot is None:
        return 0.0
    to_goal = ped.goal - ped.position
    dist_goal = float(np.linalg.norm(to_goal))
    if dist_goal < ARRIVAL_RADIUS:
        return 0.0
    travel = to_goal / dist_goal
    rel = robot.position - ped.position
    along = float(rel @ travel)
    if along < -0.5:
        return 0.0  # robot passed; release the lane
    if ped.yield_side != 0.0:
        return ped.yield_side
    if along <= 0.0 or float(np.linalg.norm(rel)) > ped.params.pass_engage_distance:
        return 0.0
    aisle = world.nearest_aisle(ped.position)
    robot_lat = aisle.lateral_offset(robot.position)
    own_lat = aisle.lateral_offset(ped.position)
    if abs(robot_lat) > 0.03:
        return -math.copysign(1.0, robot_lat)
    if abs(own_lat) > 1e-6:
        return math.copysign(1.0, own_lat)
    return 1.0


def social_forces(ped: PedestrianState, robot: Optional[RobotState],
                  world: CorridorWorld) -> np.ndarray:
    """Total acceleration on the pedestrian (goal relaxation + repulsions).

    The relaxation target is the goal, or a near-wall pass-lane point while
    an oncoming robot is engaged (people clear a lane for oncoming traffic
    well before repulsion forces become noticeable).
    """
    to_goal = ped.goal - ped.position
    dist_goal = float(np.linalg.norm(to_goal))
    if dist_goal > ARRIVAL_RADIUS:
        aim = ped.goal
        if ped.yield_side != 0.0 and dist_goal > ped.params.pass_lookahead:
            aisle = world.nearest_aisle(ped.position)
            travel_sign = 1.0 if aisle.axis_position(ped.goal) >= aisle.axis_position(
                ped.position) else -1.0
            lane_lat = ped.yield_side * (aisle.width / 2.0 - ped.radius
                                         - ped.params.pass_wall_margin)
            aim = aisle.point_at(
                aisle.axis_position(ped.position)
                + travel_sign * ped.params.pass_lookahead, lane_lat)
        to_aim = aim - ped.position
        norm = float(np.linalg.norm(to_aim))
        desired_v = ped.desired_speed * to_aim / norm if norm > 1e-9 else np.zeros(2)
    else:
        desired_v = np.zeros(2)
    accel = (desired_v - ped.velocity) / ped.params.tau

    params = ped.params
    if robot is not None:
        offset = ped.position - robot.position
        d = float(np.linalg.norm(offset))
        if d < 1e-9:
            # coincident centers: push along the corridor axis, deterministically
            aisle = world.nearest_aisle(ped.position)
            away = aisle.axis_direction.copy()
            d = 1e-9
            log.warning("pedestrian coincident with robot; using corridor-axis fallback")
        else:
            away = offset / d
        accel = accel + _repulsion(away, d, ped.radius + world.robot_radius,
                                   params.repulsion_gain, params.repulsion_range)

    for wall in world.walls:
        cp = wall.closest_point(ped.position)
        offset = ped.position - cp
        d = float(np.linalg.norm(offset))
        if d < 1e-9:
            continue
        normal = offset / d
        accel = accel + _repulsion(normal, d, ped.radius,
                                   params.wall_gain, params.wall_range)
        margin = d - ped.radius
        if margin < params.wall_damping_layer:
            v_n = float(ped.velocity @ normal)
            if v_n < 0.0:
                strength = 1.0 - max(margin, 0.0) / params.wall_damping_layer
                accel = accel - params.wall_damping * strength * v_n * normal

    return accel


def _enforce_wall_clearance(ped: PedestrianState, world: CorridorWorld) -> None:
    """Hard projection fallback; firing is counted and must stay 0 nominally."""
    for wall in world.walls:
        cp = wall.closest_point(ped.position)
        offset = ped.position - cp
        d = float(np.linalg.norm(offset))
        if d < ped.radius:
            if d < 1e-9:
                aisle = world.nearest_aisle(ped.position)
                normal = aisle.normal
                ped.position = cp + ped.radius * normal
            else:
                normal = offset / d
                ped.position = cp + ped.radius * normal
            vn = float(ped.velocity @ normal)
            if vn < 0.0:
                ped.velocity = ped.velocity - vn * normal
            ped.wall_fallback_count += 1


def social_force_step(ped: PedestrianState, robot: Optional[RobotState],
                      world: CorridorWorld, dt: float) -> PedestrianState:
    """One semi-implicit integration step of the social-force walker."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    out = ped.copy()
    out.yield_side = _update_yield_side(ped, robot, world)
    accel = social_forces(out, robot, world)
    out.velocity = ped.velocity + accel * dt
    cap = SPEED_CAP_FACTOR * ped.desired_speed
    speed = float(np.linalg.norm(out.velocity))
    if speed > cap:
        out.velocity = out.velocity * (cap / speed)
    out.position = ped.position + out.velocity * dt
    out.elapsed = ped.elapsed + dt
    _enforce_wall_clearance(out, world)
    return out


def _waypoint_position(waypoints: Sequence[tuple[float, float, float]],
                       t: float) -> np.ndarray:
    if t <= waypoints[0][0]:
        return np.array(waypoints[0][1:3], dtype=float)
    for (t0, x0, y0), (t1, x1, y1) in zip(waypoints, waypoints[1:]):
        if t0 <= t <= t1:
            u = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
            return np.array([x0 + u * (x1 - x0), y0 + u * (y1 - y0)])
    return np.array(waypoints[-1][1:3], dtype=float)


def _blocker_step(ped: PedestrianState, robot: RobotState, world: CorridorWorld,
                  dt: float) -> PedestrianState:
    out = ped.copy()
    aisle = world.nearest_aisle(ped.position)
    # corridor frame oriented along the blocker's own travel direction
    to_goal_axis = aisle.axis_position(ped.goal) - aisle.axis_position(ped.position)
    direction = 1.0 if to_goal_axis >= 0 else -1.0
    axis = direction * aisle.axis_direction

    robot_lat = aisle.lateral_offset(robot.position)
    own_lat = aisle.lateral_offset(ped.position)
    gap = float(np.linalg.norm(robot.position - ped.position))
    script = ped.script

    if ped.phase == "approach":
        if gap <= script.engage_distance:
            out.phase = "standoff"
            out.phase_time = 0.0
            lateral_speed = 0.0
            forward_speed = 0.0
        else:
            # mirror the robot's lateral side while walking at it
            if abs(robot_lat) < 0.02:
                target_lat = 0.0
            else:
                target_lat = math.copysign(script.mirror_offset, robot_lat)
            err = target_lat - own_lat
            lateral_speed = max(-script.lateral_rate, min(script.lateral_rate, err / max(dt, 1e-6)))
            forward_speed = ped.desired_speed
    elif ped.phase == "standoff":
        out.phase_time = ped.phase_time + dt
        lateral_speed = 0.0
        forward_speed = 0.0
        if out.phase_time >= script.dwell_time:
            out.phase = "passing"
            free_sign = -math.copysign(1.0, robot_lat) if abs(robot_lat) > 1e-6 else 1.0
            out.pass_side = free_sign
    else:  # passing
        half = aisle.width / 2.0
        target_lat = ped.pass_side * (half - ped.radius - 0.02)
        err = target_lat - own_lat
        lateral_speed = max(-script.lateral_rate, min(script.lateral_rate, err / max(dt, 1e-6)))
        forward_speed = script.pass_speed

    # lateral targets are expressed in the aisle frame, so use its normal directly
    velocity = forward_speed * axis + lateral_speed * aisle.normal
    out.velocity = velocity
    out.position = ped.position + velocity * dt
    out.elapsed = ped.elapsed + dt
    _enforce_wall_clearance(out, world)
    return out


def scripted_step(ped: PedestrianState, robot: RobotState, world: CorridorWorld,
                  dt: float) -> PedestrianState:
    """Advance a scripted pedestrian (timed waypoints or same-side blocker)."""
    if ped.behaviour == Behaviour.SCRIPTED_WAYPOINTS:
        if not ped.waypoints:
            raise ValueError("waypoint behaviour requires waypoints")
        out = ped.copy()
        t = ped.elapsed + dt
        pos = _waypoint_position(ped.waypoints, t)
        out.velocity = (pos - ped.position) / dt
        out.position = pos
        out.elapsed = t
        return out
    if ped.behaviour == Behaviour.SAME_SIDE_BLOCKER:
        return _blocker_step(ped, robot, world, dt)
    raise ValueError(f"not a scripted behaviour: {ped.behaviour}")


def pedestrian_step(ped: PedestrianState, robot: RobotState, world: CorridorWorld,
                    dt: float) -> PedestrianState:
    """Dispatch on behaviour; the harness calls this each physics tick."""
    if ped.behaviour == Behaviour.SOCIAL_FORCE:
        return social_force_step(ped, robot, world, dt)
    return scripted_step(ped, robot, world, dt)
