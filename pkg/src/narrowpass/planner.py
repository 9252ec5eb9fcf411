"""10 Hz path planner: free navigation plus the step / slide-rotate crossing
behaviour, with the rotation and slide factors independently togglable.

The planner is a pure function of its inputs and returns a new state each
call. It consumes tracker estimates, never ground truth. Paths carry both
position and orientation; orientation targets are only ever the corridor
axis or the axis rotated by the configured crossing angle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Optional, Sequence

import numpy as np

from .core import Aisle, CorridorWorld, Path, PathPoint, Pose2, normalize_angle
from .kinematics import RobotState
from .perception import TrackedPerson

NO_CROSSING_EPSILON = 0.05  # m/s; closing speeds below this predict no crossing


class Mode(Enum):
    FREE_NAVIGATION = "free_navigation"
    STEP = "step"
    SLIDE_ROTATE = "slide_rotate"


class Side(Enum):
    LEFT = 1
    RIGHT = -1

    @property
    def sign(self) -> int:
        return self.value


@dataclass(frozen=True)
class PlannerConfig:
    step_trigger_distance: float = 4.0
    rotate_time_threshold: float = 1.8
    rotate_angle: float = math.pi / 3.0
    slide_lookahead: float = 0.5
    wall_offset: float = 0.28
    rotation_enabled: bool = True
    slide_enabled: bool = True
    rotate_back_clearance: float = 0.5
    # artifact plumbing, not behaviour factors:
    step_advance: float = 0.15          # forward lead of the step waypoint
    step_complete_tolerance: float = 0.05
    blocked_stop_distance: float = 1.0
    release_hysteresis: float = 0.5     # extra distance before an episode is abandoned

    def __post_init__(self) -> None:
        if self.rotate_time_threshold <= 0 or self.rotate_angle <= 0:
            raise ValueError("rotation parameters must be positive")
        if self.wall_offset <= 0 or self.slide_lookahead <= 0:
            raise ValueError("geometry parameters must be positive")

    def validate_against(self, omega_max: float, robot_radius: float) -> None:
        if self.rotate_time_threshold < self.rotate_angle / omega_max:
            raise ValueError("rotation cannot complete within the time threshold")
        if self.wall_offset < robot_radius:
            raise ValueError("wall_offset must be at least the robot radius")


@dataclass(frozen=True)
class PlannerState:
    mode: Mode = Mode.FREE_NAVIGATION
    committed_side: Optional[Side] = None
    rotating: bool = False
    target_person_id: Optional[int] = None
    t_cross: Optional[float] = None   # last crossing prediction, for traces
    blocked: bool = False             # same-side hold active, for traces

    def __post_init__(self) -> None:
        if self.mode is not Mode.FREE_NAVIGATION and self.committed_side is None:
            raise ValueError("committed_side required outside free navigation")


@dataclass(frozen=True)
class CorridorFrame:
    """Travel frame inside the robot's aisle: axis toward the goal, left = +."""

    aisle: Aisle
    forward: int  # +1 along the aisle definition, -1 against it

    @property
    def axis_heading(self) -> float:
        d = self.forward * self.aisle.axis_direction
        return math.atan2(d[1], d[0])

    def axis_position(self, p: np.ndarray) -> float:
        return self.forward * self.aisle.axis_position(p)

    def lateral(self, p: np.ndarray) -> float:
        return self.forward * self.aisle.lateral_offset(p)

    def point_at(self, axis_pos: float, lateral: float) -> np.ndarray:
        return self.aisle.point_at(self.forward * axis_pos, self.forward * lateral)

    def side_lateral_target(self, side: Side, wall_offset: float) -> float:
        return side.sign * (self.aisle.width / 2.0 - wall_offset)


def corridor_frame(robot: RobotState, goal: np.ndarray,
                   world: CorridorWorld) -> CorridorFrame:
    aisle = world.nearest_aisle(robot.position)
    forward = 1 if aisle.axis_position(goal) >= aisle.axis_position(robot.position) else -1
    return CorridorFrame(aisle=aisle, forward=forward)


def crossing_time(d_p: float, v_r: float) -> float:
    """Predicted time until crossing: distance over closing speed.

    Returns +inf when the closing speed is too small (no crossing predicted).
    """
    if d_p < 0:
        raise ValueError("distance must be non-negative")
    if v_r <= NO_CROSSING_EPSILON:
        return math.inf
    return d_p / v_r


def person_on_way(robot: RobotState, track: TrackedPerson, goal: np.ndarray,
                  world: CorridorWorld,
                  closing_speed: Optional[float] = None,
                  trigger_distance: float = 4.0) -> bool:
    """True when the track lies between the robot and its goal in the same
    aisle and is either approaching or already near."""
    r = robot.position
    g = np.asarray(goal, dtype=float)
    seg = g - r
    denom = float(seg @ seg)
    if denom < 1e-12:
        return False
    t = float((track.position_estimate - r) @ seg) / denom
    if not 0.0 < t < 1.0:
        return False
    aisle = world.nearest_aisle(r)
    if not aisle.contains(track.position_estimate, margin=0.1):
        return False
    distance = float(np.linalg.norm(track.position_estimate - r))
    approaching = closing_speed is not None and closing_speed > 0.0
    return approaching or distance < trigger_distance


def choose_step_side(robot: RobotState, track: TrackedPerson,
                     frame: CorridorFrame, tie_band: float = 0.05) -> Side:
    """Step to the side opposite the person's lateral offset; ties go to the
    robot's own current side, then Right."""
    lat_p = frame.lateral(track.position_estimate)
    if lat_p > tie_band:
        return Side.RIGHT
    if lat_p < -tie_band:
        return Side.LEFT
    lat_r = frame.lateral(robot.position)
    if abs(lat_r) > 1e-6:
        return Side.LEFT if lat_r > 0 else Side.RIGHT
    return Side.RIGHT


def _clamp_axis(frame: CorridorFrame, axis_pos: float, margin: float) -> float:
    hi = frame.aisle.length - margin
    lo = margin
    if frame.forward < 0:
        # axis_position is measured along travel; convert aisle extent
        hi = frame.axis_position(np.array(frame.aisle.start)) - margin
        lo = frame.axis_position(np.array(frame.aisle.end)) + margin
        lo, hi = min(lo, hi), max(lo, hi)
    return min(max(axis_pos, lo), hi)


def step_phase_path(robot: RobotState, side: Side, frame: CorridorFrame,
                    cfg: PlannerConfig, world: CorridorWorld) -> Path:
    """Diagonal step toward the chosen wall, facing down the corridor.

    The waypoint sits on the wall-offset line a short distance ahead, so the
    commanded motion is a steep slowing diagonal until the lateral target is
    reached.
    """
    lat_t = frame.side_lateral_target(side, cfg.wall_offset)
    heading = frame.axis_heading
    ax = _clamp_axis(frame, frame.axis_position(robot.position) + cfg.step_advance,
                     world.robot_radius)
    p = frame.point_at(ax, lat_t)
    points = [
        PathPoint(robot.pose),
        PathPoint(Pose2(p[0], p[1], heading)),
    ]
    return Path(points, at=robot.pose)


def slide_goal(robot: RobotState, side: Side, frame: CorridorFrame,
               cfg: PlannerConfig, world: CorridorWorld) -> np.ndarray:
    """Moving wall-following target half a meter ahead; when sliding is
    disabled the temporary goal is the current position (hold)."""
    if not cfg.slide_enabled:
        return robot.position.copy()
    lat_t = frame.side_lateral_target(side, cfg.wall_offset)
    ax = frame.axis_position(robot.position) + cfg.slide_lookahead
    ax = _clamp_axis(frame, ax, world.robot_radius)
    return frame.point_at(ax, lat_t)


def rotate_decision(t_cross: float, person_side_sign: int, state: PlannerState,
                    cfg: PlannerConfig, axis_heading: float) -> tuple[float, bool]:
    """Target heading and the (latched) rotation flag for this tick."""
    if not cfg.rotation_enabled:
        return axis_heading, False
    rotating = state.rotating or t_cross <= cfg.rotate_time_threshold
    if rotating:
        return normalize_angle(axis_heading + person_side_sign * cfg.rotate_angle), True
    return axis_heading, False


def rotate_back(robot: RobotState, track: Optional[TrackedPerson],
                frame: CorridorFrame, cfg: PlannerConfig) -> bool:
    """End-of-episode test: the person has passed behind the robot, or the
    track was dropped (which already embeds the coast timeout)."""
    if track is None:
        return True
    behind = frame.axis_position(robot.position) - frame.axis_position(
        track.position_estimate)
    return behind >= cfg.rotate_back_clearance


def blocked_stop(robot: RobotState, track: TrackedPerson, frame: CorridorFrame,
                 cfg: PlannerConfig, committed: Side) -> bool:
    """Hold when the person is ahead on the robot's committed side and close."""
    lat_p = frame.lateral(track.position_estimate)
    if lat_p * committed.sign <= 0:
        return False
    ahead = frame.axis_position(track.position_estimate) > frame.axis_position(
        robot.position)
    if not ahead:
        return False
    distance = float(np.linalg.norm(track.position_estimate - robot.position))
    return distance <= cfg.blocked_stop_distance


def _free_path(robot: RobotState, goal: np.ndarray, heading: float) -> Path:
    points = [
        PathPoint(robot.pose),
        PathPoint(Pose2(float(goal[0]), float(goal[1]), heading)),
    ]
    return Path(points, at=robot.pose)


def _select_target(robot: RobotState, tracks: Sequence[TrackedPerson],
                   goal: np.ndarray, world: CorridorWorld,
                   closing_speeds: Mapping[int, Optional[float]],
                   cfg: PlannerConfig) -> Optional[TrackedPerson]:
    candidates = [
        t for t in tracks
        if person_on_way(robot, t, goal, world, closing_speeds.get(t.id),
                         cfg.step_trigger_distance)
    ]
    if not candidates:
        return None
    return min(candidates,
               key=lambda t: float(np.linalg.norm(t.position_estimate - robot.position)))


def _find_track(tracks: Sequence[TrackedPerson], track_id: Optional[int]
                ) -> Optional[TrackedPerson]:
    for t in tracks:
        if t.id == track_id:
            return t
    return None


_FREE_STATE_FIELDS = dict(mode=Mode.FREE_NAVIGATION, committed_side=None,
                          rotating=False, target_person_id=None,
                          t_cross=None, blocked=False)


def plan(robot: RobotState, tracks: Sequence[TrackedPerson], goal: np.ndarray,
         world: CorridorWorld, cfg: PlannerConfig, state: PlannerState,
         closing_speeds: Optional[Mapping[int, Optional[float]]] = None
         ) -> tuple[Path, PlannerState]:
    """One planning cycle; returns the new path and successor state."""
    goal = np.asarray(goal, dtype=float)
    closing_speeds = closing_speeds or {}
    frame = corridor_frame(robot, goal, world)
    heading_axis = frame.axis_heading

    mode = state.mode
    committed = state.committed_side
    rotating = state.rotating
    target_id = state.target_person_id

    # --- transitions -----------------------------------------------------
    if mode is Mode.FREE_NAVIGATION:
        target = _select_target(robot, tracks, goal, world, closing_speeds, cfg)
        if target is not None:
            distance = float(np.linalg.norm(target.position_estimate - robot.position))
            if distance < cfg.step_trigger_distance:
                mode = Mode.STEP
                committed = choose_step_side(robot, target, frame)
                target_id = target.id
    else:
        target = _find_track(tracks, target_id)

    if mode is Mode.STEP:
        if target is None:
            return _free_path(robot, goal, heading_axis), PlannerState(**_FREE_STATE_FIELDS)
        lat_t = frame.side_lateral_target(committed, cfg.wall_offset)
        if abs(frame.lateral(robot.position) - lat_t) < cfg.step_complete_tolerance:
            mode = Mode.SLIDE_ROTATE

    if mode is Mode.SLIDE_ROTATE:
        if rotate_back(robot, target, frame, cfg):
            return _free_path(robot, goal, heading_axis), PlannerState(**_FREE_STATE_FIELDS)
        distance = float(np.linalg.norm(target.position_estimate - robot.position))
        abandoned = (not person_on_way(robot, target, goal, world,
                                       closing_speeds.get(target.id),
                                       cfg.step_trigger_distance)
                     and distance > cfg.step_trigger_distance + cfg.release_hysteresis)
        if abandoned:
            return _free_path(robot, goal, heading_axis), PlannerState(**_FREE_STATE_FIELDS)

    # --- path emission ---------------------------------------------------
    if mode is Mode.FREE_NAVIGATION:
        path = _free_path(robot, goal, heading_axis)
        return path, PlannerState(**_FREE_STATE_FIELDS)

    if mode is Mode.STEP:
        blocked = blocked_stop(robot, target, frame, cfg, committed)
        if blocked:
            lat_t = frame.side_lateral_target(committed, cfg.wall_offset)
            hold = frame.point_at(frame.axis_position(robot.position), lat_t)
            path = Path([PathPoint(robot.pose),
                         PathPoint(Pose2(float(hold[0]), float(hold[1]), heading_axis))],
                        at=robot.pose)
        else:
            path = step_phase_path(robot, committed, frame, cfg, world)
        return path, PlannerState(mode=mode, committed_side=committed,
                                  rotating=False, target_person_id=target_id,
                                  t_cross=None, blocked=blocked)

    # slide-rotate
    d_p = float(np.linalg.norm(target.position_estimate - robot.position))
    v_r = closing_speeds.get(target.id)
    t_cross = crossing_time(d_p, v_r) if v_r is not None else math.inf
    person_sign = -committed.sign  # the person crosses on the opposite side
    heading_target, rotating = rotate_decision(t_cross, person_sign, state, cfg,
                                               heading_axis)
    blocked = blocked_stop(robot, target, frame, cfg, committed)
    if blocked or not cfg.slide_enabled:
        # hold: no forward progress, but finish the sidestep onto the wall
        # line so the lane stays clear for the person
        lat_t = frame.side_lateral_target(committed, cfg.wall_offset)
        goal_point = frame.point_at(frame.axis_position(robot.position), lat_t)
    else:
        goal_point = slide_goal(robot, committed, frame, cfg, world)
    points = [
        PathPoint(robot.pose),
        PathPoint(Pose2(float(goal_point[0]), float(goal_point[1]), heading_target)),
    ]
    path = Path(points, at=robot.pose)
    new_state = PlannerState(mode=mode, committed_side=committed, rotating=rotating,
                             target_person_id=target_id,
                             t_cross=None if math.isinf(t_cross) else t_cross,
                             blocked=blocked)
    return path, new_state
