"""Deterministic simulation loop wiring all modules at their native rates,
plus per-run metric computation and the 2x2 condition suite."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path as FilePath
from typing import Optional, Sequence

import numpy as np

from .core import CorridorWorld, KinematicLimits
from .kinematics import RobotState, integrate
from .navigator import Navigator, Obstacle, goal_reached
from .pedestrian import Behaviour, PedestrianState, pedestrian_step
from .perception import PeopleTracker, PerfectTracker, sense
from .planner import Mode, PlannerState, plan
from .scenario import Scenario

STOPPED_SPEED = 0.01        # m/s; below this the robot counts as stopped
CROSSING_ZONE = 1.5         # m; ahead-to-alongside window used by metrics
HEADING_MATCH = math.radians(2.0)  # rotation counts as complete inside this


@dataclass
class SimTrace:
    """Per-physics-tick record of one run; the unit of analysis and export."""

    columns: list[str]
    rows: list[tuple]
    world: CorridorWorld
    ped_radii: tuple[float, ...]
    dt_physics: float
    timed_out: bool
    limits: KinematicLimits = field(default_factory=KinematicLimits)
    wall_fallbacks: int = 0

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([row[i] for row in self.rows], dtype=float)

    def raw_column(self, name: str) -> list:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]


@dataclass(frozen=True)
class CrossingMetrics:
    collision: bool
    min_clearance: Optional[float]
    crossing_tick: Optional[int]
    rotation_trigger_tick: Optional[int]
    rotation_complete_tick: Optional[int]
    rotation_lead: Optional[float]
    traversal_time: float
    robot_stopped_during_crossing: bool
    limit_violations: int
    wall_penetrations: int
    timed_out: bool
    wall_fallbacks: int = 0


def _trace_columns(n_ped: int) -> list[str]:
    cols = [
        "tick", "time",
        "robot_x", "robot_y", "robot_heading",
        "vel_x", "vel_y", "vel_omega",
        "cmd_vx", "cmd_vy", "cmd_omega",
        "mode", "rotating", "blocked", "t_cross",
        "target_heading", "axis_heading",
    ]
    for i in range(n_ped):
        cols += [f"ped{i}_x", f"ped{i}_y"]
    for i in range(n_ped):
        cols += [f"track{i}_id", f"track{i}_x", f"track{i}_y",
                 f"track{i}_vx", f"track{i}_vy"]
    cols.append("min_clearance")
    return cols


def _build_pedestrians(sc: Scenario) -> list[PedestrianState]:
    peds = []
    for spec in sc.pedestrians:
        radius = spec.radius if spec.radius is not None else sc.world.person_radius
        peds.append(PedestrianState(
            position=np.asarray(spec.start, dtype=float),
            velocity=np.zeros(2),
            goal=np.asarray(spec.goal, dtype=float),
            desired_speed=spec.speed,
            radius=radius,
            behaviour=spec.behaviour,
            params=sc.social_force,
            waypoints=spec.waypoints,
            script=sc.blocker,
        ))
    return peds


def run_scenario(sc: Scenario) -> tuple[SimTrace, CrossingMetrics]:
    """Run one scenario to goal or timeout; fully deterministic per seed."""
    world = sc.world
    dt = sc.dt_physics
    substeps = round(sc.planner_period / sc.dt_physics)
    goal = np.asarray(sc.robot_goal, dtype=float)

    robot = RobotState.at_rest(sc.robot_start, sc.limits)
    peds = _build_pedestrians(sc)
    planner_cfg = sc.planner_config()
    pstate = PlannerState()
    navigator = Navigator(sc.gains, sc.limits)
    if sc.perfect_perception:
        tracker = PerfectTracker(sc.tracker)
    else:
        tracker = PeopleTracker(sc.tracker, seed=sc.seed)

    n_ped = len(peds)
    columns = _trace_columns(n_ped)
    rows: list[tuple] = []
    max_ticks = int(round(sc.duration_limit / dt))
    prev_mode = pstate.mode
    tracks = []
    path = None
    timed_out = True

    for tick in range(max_ticks + 1):
        t = tick * dt
        if tick % substeps == 0:
            if sc.perfect_perception:
                tracks = tracker.observe(peds, tick, sc.planner_period)
            else:
                detections = sense(world, robot, peds, sc.seed, tick, sc.tracker)
                tracks = tracker.update(detections, sc.planner_period)
            tracker.record_distance(robot.position, t)
            closing = {tr.id: tracker.closing_speed(tr.id) for tr in tracks}
            path, pstate = plan(robot, tracks, goal, world, planner_cfg, pstate,
                                closing)
            if pstate.mode is not prev_mode:
                navigator.reset()
                prev_mode = pstate.mode

        obstacles = [Obstacle(tr.position_estimate, world.person_radius)
                     for tr in tracks]
        cmd = navigator.command(path, robot, obstacles, dt)

        clearance = math.inf
        for ped in peds:
            d = float(np.linalg.norm(ped.position - robot.position))
            clearance = min(clearance, d - world.robot_radius - ped.radius)

        target_heading = path.points[-1].pose.heading if len(path) else robot.pose.heading
        row = [
            tick, t,
            robot.pose.x, robot.pose.y, robot.pose.heading,
            robot.twist.vx, robot.twist.vy, robot.twist.omega,
            cmd.vx, cmd.vy, cmd.omega,
            pstate.mode.value, int(pstate.rotating), int(pstate.blocked),
            math.nan if pstate.t_cross is None else pstate.t_cross,
            target_heading,
            _axis_heading(world, robot, goal),
        ]
        for ped in peds:
            row += [ped.position[0], ped.position[1]]
        for i in range(n_ped):
            if i < len(tracks):
                tr = tracks[i]
                row += [tr.id, tr.position_estimate[0], tr.position_estimate[1],
                        tr.velocity_estimate[0], tr.velocity_estimate[1]]
            else:
                row += [math.nan] * 5
        row.append(clearance)
        rows.append(tuple(row))

        if pstate.mode is Mode.FREE_NAVIGATION and goal_reached(path, robot, sc.gains):
            timed_out = False
            break

        robot = integrate(robot, cmd, dt)
        peds = [pedestrian_step(p, robot, world, dt) for p in peds]

    trace = SimTrace(
        columns=columns, rows=rows, world=world,
        ped_radii=tuple(p.radius for p in peds),
        dt_physics=dt, timed_out=timed_out, limits=sc.limits,
        wall_fallbacks=sum(p.wall_fallback_count for p in peds),
    )
    return trace, compute_metrics(trace)


def _axis_heading(world: CorridorWorld, robot: RobotState, goal: np.ndarray) -> float:
    aisle = world.nearest_aisle(robot.position)
    forward = 1.0 if aisle.axis_position(goal) >= aisle.axis_position(robot.position) else -1.0
    d = forward * aisle.axis_direction
    return math.atan2(d[1], d[0])


def compute_metrics(trace: SimTrace) -> CrossingMetrics:
    """Derive the per-run metrics from a trace."""
    if not trace.rows:
        raise ValueError("trace must be non-empty")
    n_ped = len(trace.ped_radii)
    dt = trace.dt_physics
    time_col = trace.column("time")
    traversal_time = float(time_col[-1])

    if n_ped:
        clearance = trace.column("min_clearance")
        min_clearance = float(np.min(clearance))
        crossing_tick = int(np.argmin(clearance))
        collision = bool(min_clearance < 0.0)
    else:
        min_clearance = None
        crossing_tick = None
        collision = False

    rotating = trace.column("rotating").astype(bool)
    rotation_trigger_tick = None
    rotation_complete_tick = None
    rotation_lead = None
    if rotating.any():
        rotation_trigger_tick = int(np.argmax(rotating))
        heading = trace.column("robot_heading")
        target = trace.column("target_heading")
        err = np.abs(np.arctan2(np.sin(heading - target), np.cos(heading - target)))
        done = rotating & (err <= HEADING_MATCH)
        if done.any():
            rotation_complete_tick = int(np.argmax(done))
            if crossing_tick is not None:
                rotation_lead = float((crossing_tick - rotation_complete_tick) * dt)

    # stopped while a pedestrian is within the ahead-to-alongside window
    robot_stopped_during_crossing = False
    if n_ped:
        speed = np.hypot(trace.column("vel_x"), trace.column("vel_y"))
        rx = trace.column("robot_x")
        ry = trace.column("robot_y")
        axis = trace.column("axis_heading")
        ux, uy = np.cos(axis), np.sin(axis)
        in_zone = np.zeros(len(trace.rows), dtype=bool)
        for i in range(n_ped):
            dx = trace.column(f"ped{i}_x") - rx
            dy = trace.column(f"ped{i}_y") - ry
            along = dx * ux + dy * uy
            dist = np.hypot(dx, dy)
            in_zone |= (along >= -0.05) & (dist <= CROSSING_ZONE)
        robot_stopped_during_crossing = bool(np.any(in_zone & (speed < STOPPED_SPEED)))

    limit_violations = _count_limit_violations(trace)
    wall_penetrations = _count_wall_penetrations(trace)

    return CrossingMetrics(
        collision=collision,
        min_clearance=min_clearance,
        crossing_tick=crossing_tick,
        rotation_trigger_tick=rotation_trigger_tick,
        rotation_complete_tick=rotation_complete_tick,
        rotation_lead=rotation_lead,
        traversal_time=traversal_time,
        robot_stopped_during_crossing=robot_stopped_during_crossing,
        limit_violations=limit_violations,
        wall_penetrations=wall_penetrations,
        timed_out=trace.timed_out,
        wall_fallbacks=trace.wall_fallbacks,
    )


def _count_limit_violations(trace: SimTrace) -> int:
    lim = trace.limits
    dt = trace.dt_physics
    tol = 1e-6
    speed = np.hypot(trace.column("vel_x"), trace.column("vel_y"))
    omega = trace.column("vel_omega")
    count = int(np.sum(speed > lim.v_max + tol))
    count += int(np.sum(np.abs(omega) > lim.omega_max + tol))
    if len(speed) > 1:
        dv = np.abs(np.diff(speed))
        dw = np.abs(np.diff(omega))
        count += int(np.sum(dv > lim.a_max * dt + tol))
        count += int(np.sum(dw > lim.alpha_max * dt + tol))
    return count


def _min_wall_distances(world: CorridorWorld, xs: np.ndarray,
                        ys: np.ndarray) -> np.ndarray:
    pts = np.stack([xs, ys], axis=1)
    best = np.full(len(pts), np.inf)
    for wall in world.walls:
        a, b = wall.p1, wall.p2
        ab = b - a
        denom = float(ab @ ab)
        if denom > 0:
            t = np.clip(((pts - a) @ ab) / denom, 0.0, 1.0)
        else:
            t = np.zeros(len(pts))
        proj = a + t[:, None] * ab
        best = np.minimum(best, np.linalg.norm(pts - proj, axis=1))
    return best


def _count_wall_penetrations(trace: SimTrace) -> int:
    world = trace.world
    tol = 1e-6
    d = _min_wall_distances(world, trace.column("robot_x"), trace.column("robot_y"))
    count = int(np.sum(d < world.robot_radius - tol))
    for i, radius in enumerate(trace.ped_radii):
        d = _min_wall_distances(world, trace.column(f"ped{i}_x"),
                                trace.column(f"ped{i}_y"))
        count += int(np.sum(d < radius - tol))
    return count


CONDITIONS = (
    ("rotation_slide", True, True),
    ("rotation_no-slide", True, False),
    ("no-rotation_slide", False, True),
    ("no-rotation_no-slide", False, False),
)


@dataclass(frozen=True)
class ConditionSummary:
    label: str
    rotation: bool
    slide: bool
    runs: int
    collisions: int
    timeouts: int
    min_clearance: float
    mean_traversal_time: float
    mean_rotation_lead: Optional[float]
    limit_violations: int
    wall_penetrations: int


@dataclass
class SuiteResult:
    summaries: list[ConditionSummary]
    metrics: dict[tuple[str, int], CrossingMetrics]
    failed: bool

    def traversal_means(self) -> dict[str, float]:
        return {s.label: s.mean_traversal_time for s in self.summaries}


def run_condition_suite(base: Scenario, seeds: Sequence[int],
                        out_dir: Optional[str | FilePath] = None) -> SuiteResult:
    """Run the 2x2 condition grid over the given seeds and aggregate."""
    from .export import export_csv  # local import to avoid a cycle

    out = FilePath(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)

    all_metrics: dict[tuple[str, int], CrossingMetrics] = {}
    summaries = []
    failed = False
    for label, rotation, slide in CONDITIONS:
        per_condition = []
        for seed in seeds:
            sc = base.with_condition(rotation=rotation, slide=slide, seed=seed)
            trace, metrics = run_scenario(sc)
            all_metrics[(label, seed)] = metrics
            per_condition.append(metrics)
            if metrics.collision:
                failed = True
            if out is not None:
                export_csv(trace, out / f"{base.name}_{label}_seed{seed}.csv")
        leads = [m.rotation_lead for m in per_condition if m.rotation_lead is not None]
        clearances = [m.min_clearance for m in per_condition
                      if m.min_clearance is not None]
        summaries.append(ConditionSummary(
            label=label, rotation=rotation, slide=slide,
            runs=len(per_condition),
            collisions=sum(m.collision for m in per_condition),
            timeouts=sum(m.timed_out for m in per_condition),
            min_clearance=min(clearances) if clearances else math.inf,
            mean_traversal_time=float(np.mean([m.traversal_time
                                               for m in per_condition])),
            mean_rotation_lead=float(np.mean(leads)) if leads else None,
            limit_violations=sum(m.limit_violations for m in per_condition),
            wall_penetrations=sum(m.wall_penetrations for m in per_condition),
        ))

    if out is not None:
        _write_summary_csv(out / f"{base.name}_summary.csv", summaries)
    return SuiteResult(summaries=summaries, metrics=all_metrics, failed=failed)


def _write_summary_csv(path: FilePath, summaries: Sequence[ConditionSummary]) -> None:
    lines = ["condition,rotation,slide,runs,collisions,timeouts,min_clearance,"
             "mean_traversal_time,mean_rotation_lead,limit_violations,wall_penetrations"]
    for s in summaries:
        lead = "" if s.mean_rotation_lead is None else f"{s.mean_rotation_lead:.6g}"
        lines.append(
            f"{s.label},{int(s.rotation)},{int(s.slide)},{s.runs},{s.collisions},"
            f"{s.timeouts},{s.min_clearance:.6g},{s.mean_traversal_time:.6g},"
            f"{lead},{s.limit_violations},{s.wall_penetrations}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
