"""Command line front end: run one scenario, run the 2x2 suite, or execute
the brute-force oracle checks."""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from .core import Pose2, Twist2
from .harness import run_condition_suite, run_scenario
from .kinematics import integrate, RobotState
from .oracles import euler_integrate_twist, fine_crossing_time
from .planner import crossing_time
from .scenario import ScenarioError, load_scenario


def _on_off(value: str) -> bool:
    v = value.lower()
    if v in ("on", "true", "1", "yes"):
        return True
    if v in ("off", "false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected on|off, got {value!r}")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="narrowpass",
        description="Deterministic corridor-crossing simulator for an "
                    "omni-directional robot",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a single scenario")
    run_p.add_argument("--scenario", required=True, help="scenario TOML file")
    run_p.add_argument("--rotation", type=_on_off, default=None,
                       help="override the rotation factor (on|off)")
    run_p.add_argument("--slide", type=_on_off, default=None,
                       help="override the slide factor (on|off)")
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--trace", default=None, help="write trace CSV here")
    run_p.add_argument("--svg", default=None, help="write trajectory SVG here")

    suite_p = sub.add_parser("suite", help="run the 2x2 condition grid")
    suite_p.add_argument("--scenario", required=True)
    suite_p.add_argument("--seeds", type=int, default=5,
                         help="number of seeds per condition")
    suite_p.add_argument("--out", required=True, help="output directory")

    sub.add_parser("oracle", help="run the brute-force verification checks")
    return parser


def _cmd_run(args) -> int:
    sc = load_scenario(args.scenario)
    sc = sc.with_condition(rotation=args.rotation, slide=args.slide,
                           seed=args.seed)
    trace, metrics = run_scenario(sc)

    if args.trace:
        from .export import export_csv
        export_csv(trace, args.trace)
    if args.svg:
        from .export import render_svg
        render_svg(trace, sc.world, args.svg)

    print(f"scenario: {sc.name} [{sc.condition_label}] seed={sc.seed}")
    print(f"traversal_time: {metrics.traversal_time:.2f} s"
          + (" (timeout)" if metrics.timed_out else ""))
    if metrics.min_clearance is not None:
        print(f"min_clearance: {metrics.min_clearance:.3f} m")
    if metrics.rotation_lead is not None:
        print(f"rotation_lead: {metrics.rotation_lead:.2f} s")
    print(f"collision: {metrics.collision}  limit_violations: "
          f"{metrics.limit_violations}  wall_penetrations: {metrics.wall_penetrations}")

    if metrics.collision:
        print("FAILED: collision", file=sys.stderr)
        return 2
    if metrics.timed_out:
        print("FAILED: timeout", file=sys.stderr)
        return 3
    return 0


def _cmd_suite(args) -> int:
    sc = load_scenario(args.scenario)
    seeds = list(range(args.seeds))
    result = run_condition_suite(sc, seeds, out_dir=args.out)
    print(f"{'condition':24s} {'runs':>4s} {'coll':>4s} {'t/o':>4s} "
          f"{'min_clear':>9s} {'mean_time':>9s}")
    for s in result.summaries:
        print(f"{s.label:24s} {s.runs:4d} {s.collisions:4d} {s.timeouts:4d} "
              f"{s.min_clearance:9.3f} {s.mean_traversal_time:9.2f}")
    if result.failed:
        print("SUITE FAILED: collision occurred", file=sys.stderr)
        return 2
    return 0


def _cmd_oracle(args) -> int:
    rng = np.random.default_rng(20240)
    ok = True

    worst = 0.0
    for _ in range(200):
        pose = Pose2(*rng.uniform(-2, 2, size=2), rng.uniform(-math.pi, math.pi))
        twist = Twist2(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5),
                       rng.uniform(-1.0, 1.0))
        dt = float(rng.uniform(0.005, 0.1))
        from .core import KinematicLimits
        state = RobotState(pose, Twist2.zero(), KinematicLimits())
        exact = integrate(state, twist, dt).pose
        approx = euler_integrate_twist(pose, twist, dt, substeps=100_000)
        err = math.hypot(exact.x - approx.x, exact.y - approx.y)
        worst = max(worst, err)
    print(f"integration vs fine-step oracle: worst error {worst:.2e} m "
          f"({'OK' if worst < 1e-6 else 'FAIL'})")
    ok &= worst < 1e-6

    worst_t = 0.0
    for _ in range(100):
        gap = float(rng.uniform(1.0, 8.0))
        v_robot = float(rng.uniform(0.0, 1.0))
        v_ped = float(rng.uniform(0.5, 1.5))
        predicted = crossing_time(gap, v_robot + v_ped)
        simulated = fine_crossing_time([0.0, 0.0], [v_robot, 0.0],
                                       [gap, 0.0], [-v_ped, 0.0])
        worst_t = max(worst_t, abs(predicted - simulated))
    print(f"crossing-time formula vs fine simulation: worst error {worst_t:.2e} s "
          f"({'OK' if worst_t < 1e-3 else 'FAIL'})")
    ok &= worst_t < 1e-3

    return 0 if ok else 1


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "suite":
            return _cmd_suite(args)
        return _cmd_oracle(args)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
