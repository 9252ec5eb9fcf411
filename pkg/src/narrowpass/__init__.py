"""narrowpass: deterministic 2-D simulation and planning for an
omni-directional robot crossing people in narrow corridors.

The planner realises the three-phase crossing behaviour (step aside, slide
along the wall, rotate the body just in time) with the rotation and slide
factors independently togglable, so all four behavioural conditions can be
run, traced, and verified.
"""

from .core import (
    Aisle,
    CorridorWorld,
    KinematicLimits,
    Path,
    PathPoint,
    Pose2,
    Segment,
    SimClock,
    Twist2,
    normalize_angle,
    point_to_wall_distance,
    single_aisle,
    two_aisle_shop,
)
from .kinematics import RobotState, clamp_command, integrate
from .pedestrian import (
    Behaviour,
    BlockerScript,
    PedestrianState,
    SocialForceParams,
    pedestrian_step,
    scripted_step,
    social_force_step,
)
from .perception import (
    Detection,
    PeopleTracker,
    PerfectTracker,
    TrackedPerson,
    TrackerConfig,
    relative_closing_speed,
    sense,
)
from .planner import (
    Mode,
    PlannerConfig,
    PlannerState,
    Side,
    blocked_stop,
    choose_step_side,
    corridor_frame,
    crossing_time,
    person_on_way,
    plan,
    rotate_back,
    rotate_decision,
    slide_goal,
    step_phase_path,
)
from .navigator import Navigator, NavigatorGains, Obstacle, goal_reached
from .harness import (
    CrossingMetrics,
    SimTrace,
    SuiteResult,
    compute_metrics,
    run_condition_suite,
    run_scenario,
)
from .export import export_csv, render_svg
from .scenario import PedestrianSpec, Scenario, ScenarioError, load_scenario

__version__ = "0.1.0"
