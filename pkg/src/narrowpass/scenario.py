"""Scenario files: flat TOML schema describing world, agents, and condition.

Sections: [world], [robot], [[pedestrians]], [condition], [run], plus
optional override tables [planner], [navigator], [tracker], [limits],
[social_force], [perception], [blocker]. A top-level `schema = 1` guards
format evolution.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field, replace
from pathlib import Path as FilePath
from typing import Any, Optional

import numpy as np

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .core import CorridorWorld, KinematicLimits, Pose2, single_aisle, two_aisle_shop
from .navigator import NavigatorGains
from .pedestrian import Behaviour, BlockerScript, SocialForceParams
from .perception import TrackerConfig
from .planner import PlannerConfig

SCHEMA_VERSION = 1

_WORLD_PRESETS = {
    "single_aisle": single_aisle,
    "two_aisle_shop": two_aisle_shop,
}


class ScenarioError(ValueError):
    """Raised for malformed or inconsistent scenario files."""


@dataclass(frozen=True)
class PedestrianSpec:
    start: tuple[float, float]
    goal: tuple[float, float]
    speed: float = 1.2
    behaviour: Behaviour = Behaviour.SOCIAL_FORCE
    radius: Optional[float] = None  # None -> world person_radius
    waypoints: tuple[tuple[float, float, float], ...] = ()


@dataclass(frozen=True)
class Scenario:
    name: str
    world: CorridorWorld
    robot_start: Pose2
    robot_goal: tuple[float, float]
    pedestrians: tuple[PedestrianSpec, ...] = ()
    rotation: bool = True
    slide: bool = True
    seed: int = 0
    duration_limit: float = 60.0
    dt_physics: float = 0.01
    planner_period: float = 0.1
    limits: KinematicLimits = field(default_factory=KinematicLimits)
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    gains: NavigatorGains = field(default_factory=NavigatorGains)
    tracker: TrackerConfig = field(default_factory=TrackerConfig)
    social_force: SocialForceParams = field(default_factory=SocialForceParams)
    blocker: BlockerScript = field(default_factory=BlockerScript)
    perfect_perception: bool = False

    def __post_init__(self) -> None:
        if self.duration_limit <= 0:
            raise ScenarioError("duration_limit must be positive")
        ratio = self.planner_period / self.dt_physics
        if abs(ratio - round(ratio)) > 1e-9:
            raise ScenarioError("dt_physics must divide planner_period")
        goal = np.asarray(self.robot_goal, dtype=float)
        aisle = self.world.nearest_aisle(goal)
        if not aisle.contains(goal, margin=self.world.aisle_width):
            raise ScenarioError("robot goal lies outside the world")
        start = self.robot_start.position
        for i, ped in enumerate(self.pedestrians):
            r = ped.radius if ped.radius is not None else self.world.person_radius
            gap = float(np.linalg.norm(np.asarray(ped.start) - start))
            if gap < self.world.robot_radius + r:
                raise ScenarioError(f"pedestrian {i} overlaps the robot at start")
        self.planner.validate_against(self.limits.omega_max, self.world.robot_radius)

    @property
    def condition_label(self) -> str:
        r = "rotation" if self.rotation else "no-rotation"
        s = "slide" if self.slide else "no-slide"
        return f"{r}_{s}"

    def with_condition(self, rotation: Optional[bool] = None,
                       slide: Optional[bool] = None,
                       seed: Optional[int] = None) -> "Scenario":
        sc = self
        if rotation is not None or slide is not None:
            rot = sc.rotation if rotation is None else rotation
            sl = sc.slide if slide is None else slide
            planner = replace(sc.planner, rotation_enabled=rot, slide_enabled=sl)
            sc = replace(sc, rotation=rot, slide=sl, planner=planner)
        if seed is not None:
            sc = replace(sc, seed=seed)
        return sc

    def planner_config(self) -> PlannerConfig:
        return replace(self.planner, rotation_enabled=self.rotation,
                       slide_enabled=self.slide)


def _build_dataclass(cls, overrides: dict[str, Any], what: str):
    valid = {f.name for f in dataclasses.fields(cls)}
    unknown = set(overrides) - valid
    if unknown:
        raise ScenarioError(f"unknown {what} fields: {sorted(unknown)}")
    return cls(**overrides)


def _build_world(section: dict[str, Any]) -> CorridorWorld:
    section = dict(section)
    preset = section.pop("preset", "two_aisle_shop")
    if preset not in _WORLD_PRESETS:
        raise ScenarioError(f"unknown world preset {preset!r}")
    factory = _WORLD_PRESETS[preset]
    kwargs = {}
    for key in ("robot_radius", "person_radius"):
        if key in section:
            kwargs[key] = float(section.pop(key))
    if "aisle_width" in section:
        kwargs["width"] = float(section.pop("aisle_width"))
    if "aisle_length" in section:
        length = float(section.pop("aisle_length"))
        kwargs["length" if preset == "single_aisle" else "aisle_length"] = length
    if section:
        raise ScenarioError(f"unknown world fields: {sorted(section)}")
    return factory(**kwargs)


def _build_pedestrian(entry: dict[str, Any]) -> PedestrianSpec:
    entry = dict(entry)
    try:
        start = tuple(float(v) for v in entry.pop("start"))
        goal = tuple(float(v) for v in entry.pop("goal"))
    except KeyError as exc:
        raise ScenarioError(f"pedestrian missing field {exc}") from exc
    behaviour = Behaviour(entry.pop("behaviour", "social_force"))
    waypoints = tuple(tuple(float(v) for v in w) for w in entry.pop("waypoints", ()))
    speed = float(entry.pop("speed", 1.2))
    radius = entry.pop("radius", None)
    if entry:
        raise ScenarioError(f"unknown pedestrian fields: {sorted(entry)}")
    return PedestrianSpec(start=start, goal=goal, speed=speed, behaviour=behaviour,
                          radius=None if radius is None else float(radius),
                          waypoints=waypoints)


def parse_scenario(data: dict[str, Any], name: str = "scenario") -> Scenario:
    if data.get("schema") != SCHEMA_VERSION:
        raise ScenarioError(f"scenario schema must be {SCHEMA_VERSION}")
    name = data.get("name", name)
    world = _build_world(data.get("world", {}))

    robot = data.get("robot", {})
    try:
        sx, sy = (float(v) for v in robot["start"])
        goal = tuple(float(v) for v in robot["goal"])
    except KeyError as exc:
        raise ScenarioError(f"robot section missing {exc}") from exc
    heading = float(robot.get("heading", 0.0))

    peds = tuple(_build_pedestrian(p) for p in data.get("pedestrians", []))

    condition = data.get("condition", {})
    rotation = bool(condition.get("rotation", True))
    slide = bool(condition.get("slide", True))

    run = data.get("run", {})
    seed = int(run.get("seed", 0))
    duration = float(run.get("duration_limit", 60.0))
    dt = float(run.get("dt_physics", 0.01))
    period = float(run.get("planner_period", 0.1))

    limits = _build_dataclass(KinematicLimits, data.get("limits", {}), "limits")
    planner = _build_dataclass(PlannerConfig, {
        **data.get("planner", {}),
        "rotation_enabled": rotation,
        "slide_enabled": slide,
    }, "planner")
    gains = _build_dataclass(NavigatorGains, data.get("navigator", {}), "navigator")
    tracker = _build_dataclass(TrackerConfig, data.get("tracker", {}), "tracker")
    social = _build_dataclass(SocialForceParams, data.get("social_force", {}),
                              "social_force")
    blocker = _build_dataclass(BlockerScript, data.get("blocker", {}), "blocker")
    perfect = bool(data.get("perception", {}).get("perfect", False))

    return Scenario(
        name=name, world=world, robot_start=Pose2(sx, sy, heading),
        robot_goal=goal, pedestrians=peds, rotation=rotation, slide=slide,
        seed=seed, duration_limit=duration, dt_physics=dt, planner_period=period,
        limits=limits, planner=planner, gains=gains, tracker=tracker,
        social_force=social, blocker=blocker, perfect_perception=perfect,
    )


def load_scenario(path: str | FilePath) -> Scenario:
    p = FilePath(path)
    try:
        data = tomllib.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ScenarioError(f"scenario file not found: {p}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"malformed scenario file {p}: {exc}") from exc
    return parse_scenario(data, name=p.stem)
