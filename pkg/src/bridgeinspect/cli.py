"""Command line entry point: ``plan``, ``simulate``, ``scan-debug`` and ``report``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

from bridgeinspect.geometry import BridgeConfigError, BridgeValidationError, load_bridge_file
from bridgeinspect.planner import InfeasibleCoverageError, InstanceTooSmallError, SolverParams, dump_plan, load_plan, plan_bridge

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_TIMEOUT = 4


def _floats(text: str, n: int, what: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"{what} must be {n} comma-separated numbers") from None
    if len(vals) != n or not all(math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError(f"{what} must be {n} comma-separated finite numbers")
    return vals


def _mission(path):
    from bridgeinspect.config import default_mission, load_mission

    return load_mission(Path(path).read_text()) if path else default_mission()


def cmd_plan(args) -> int:
    m = load_bridge_file(args.bridge)
    plan, inst = plan_bridge(m, SolverParams(seed=args.seed))
    Path(args.output).write_text(dump_plan(plan, inst))
    seq = " ".join(f"{leg.routine.value}({leg.surface_id})" for leg in plan.legs)
    print(f"{len(plan.legs)} legs, cost {plan.total_cost:.3f}, solved in {plan.solve_seconds:.3f} s")
    print(seq)
    return EXIT_OK


def cmd_simulate(args) -> int:
    from bridgeinspect.sim import export_log, run_mission

    m = load_bridge_file(args.bridge)
    plan = load_plan(Path(args.plan).read_text())
    cfg = _mission(args.config)
    sim = dataclasses.replace(cfg.sim, rng_seed=args.seed,
                              wind=args.wind if args.wind is not None else cfg.sim.wind)
    cfg = dataclasses.replace(cfg, sim=sim)
    log = run_mission(m, plan, cfg)
    paths = export_log(log, args.output, plan)
    met = log.metrics
    print(f"completed={met['completed']} time={met['mission_time']:.1f}s switches={met['switch_events']}")
    print(f"wrote {', '.join(str(p) for p in paths.values())}")
    if not log.completed:
        print(log.diagnostic, file=sys.stderr)
        return EXIT_TIMEOUT
    return EXIT_OK


def cmd_scan_debug(args) -> int:
    from bridgeinspect.lidar import Pose, ScanPlane, scan_to_csv, simulate_scan
    from bridgeinspect.perception import filter_points, hough_lines, select_surface_line
    from bridgeinspect.svg import scan_svg

    m = load_bridge_file(args.bridge)
    cfg = _mission(args.config)
    plane = ScanPlane(args.plane)
    scan = simulate_scan(m, Pose(*args.pose), plane, cfg.lidar, args.seed)
    pc = cfg.perception
    pts = filter_points(scan, pc.near, pc.far)
    lines = hough_lines(pts, pc.hough) if len(pts) else []
    window = pc.girder_window if plane is ScanPlane.VERTICAL else pc.column_window
    chosen = select_surface_line(lines, window)
    text = scan_to_csv(scan)
    if args.csv:
        Path(args.csv).write_text(text)
    else:
        sys.stdout.write(text)
    Path(args.svg).write_text(scan_svg(pts, lines, chosen))
    for ln in lines:
        mark = "*" if ln is chosen else " "
        print(f"{mark} theta={ln.theta:7.2f} rho={ln.rho:7.3f} extent={ln.extent:6.2f} n={ln.inlier_count}",
              file=sys.stderr)
    return EXIT_OK


def cmd_report(args) -> int:
    from bridgeinspect.sim import compute_metrics, read_csv_log, read_phases
    from bridgeinspect.planner.plan import InspectionPlan, Leg
    from bridgeinspect.geometry import RoutineKind

    out = Path(args.outdir)
    met = json.loads((out / "metrics.json").read_text())
    samples = read_csv_log((out / "trajectory.csv").read_text())
    phases = read_phases((out / "events.csv").read_text())
    legs = tuple(Leg(d["surface"], RoutineKind(d["routine"]), d["entry"], d["exit"]) for d in met.get("plan", []))
    again = compute_metrics(samples, phases, InspectionPlan(legs, ()), met["completed"], met["diagnostic"])
    consistent = all(
        math.isclose(a[k], b[k], rel_tol=0, abs_tol=1e-9)
        for a, b in zip(again["legs"], met["legs"])
        for k in ("max_standoff_err", "rms_standoff_err", "max_along_err", "rms_along_err")
    ) and again["switch_events"] == met["switch_events"]
    print(f"completed: {met['completed']}   mission time: {met['mission_time']:.1f} s   "
          f"switch events: {met['switch_events']}   transfers: {met['transfers']}")
    if met["diagnostic"]:
        print(f"diagnostic: {met['diagnostic']}")
    print(f"{'leg':>3} {'surf':>4} {'mode':>4} {'n':>6} {'max|e_s|':>9} {'rms e_s':>9} {'max|e_a|':>9} {'rms e_a':>9}")
    for r in met["legs"]:
        print(f"{r['leg']:>3} {r['surface']:>4} {r['routine']:>4} {r['samples']:>6} "
              f"{r['max_standoff_err']:>9.3f} {r['rms_standoff_err']:>9.3f} "
              f"{r['max_along_err']:>9.3f} {r['rms_along_err']:>9.3f}")
    print(f"metrics recomputed from CSV: {'match' if consistent else 'MISMATCH'}")
    if not consistent:
        return EXIT_INPUT
    return EXIT_OK if met["completed"] else EXIT_TIMEOUT


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bridgeinspect", description="Bridge coverage planning and inspection simulation")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="solve the coverage tour for a bridge")
    p.add_argument("bridge")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", help="fly a plan in closed loop")
    p.add_argument("bridge")
    p.add_argument("plan")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--wind", type=lambda s: _floats(s, 3, "--wind"), default=None)
    p.add_argument("--config", help="mission config (TOML)")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("scan-debug", help="simulate one scan and show extracted lines")
    p.add_argument("bridge")
    p.add_argument("--pose", required=True, type=lambda s: _floats(s, 4, "--pose"), help="x,y,z,yaw (yaw in radians)")
    p.add_argument("--plane", choices=["h", "v"], default="h")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="mission config (TOML)")
    p.add_argument("--csv", help="write CSV here instead of stdout")
    p.add_argument("--svg", default="scan.svg")
    p.set_defaults(func=cmd_scan_debug)

    p = sub.add_parser("report", help="print the metrics of a simulate output directory")
    p.add_argument("outdir")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InfeasibleCoverageError, InstanceTooSmallError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (BridgeConfigError, BridgeValidationError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
