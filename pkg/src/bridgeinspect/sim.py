"""Closed-loop mission simulation: plant, sensing, supervision and control."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from bridgeinspect.control import (
    ControlConfig,
    ControllerState,
    RoutineSpec,
    VelocityCommand,
    body_to_world,
    routine_command,
)
from bridgeinspect.geometry import BridgeModel, RoutineKind, SurfaceKind
from bridgeinspect.lidar import LidarSpec, Pose, ScanPlane, simulate_scan
from bridgeinspect.perception import PerceptionConfig, ScanFeatures, estimate_surface
from bridgeinspect.planner.plan import InspectionPlan
from bridgeinspect.supervisor import Supervisor, SupervisorConfig, SwitchEvent

CSV_HEADER = ("t", "x", "y", "z", "yaw", "routine", "standoff_err", "along_err", "vx", "vy", "vz")


@dataclass(frozen=True)
class UavState:
    position: tuple[float, float, float]
    velocity: tuple[float, float, float] = (0.0, 0.0, 0.0)
    yaw: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (*self.position, *self.velocity, self.yaw)):
            raise ValueError("UAV state must be finite")

    @property
    def pose(self) -> Pose:
        return Pose(*self.position, self.yaw)


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.05
    velocity_time_constant: float = 0.4
    wind: tuple[float, float, float] = (0.0, 0.0, 0.0)
    gust_amplitude: float = 0.0
    gust_period: float = 10.0
    duration_limit: float = 1200.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.dt <= 0 or self.velocity_time_constant <= 0:
            raise ValueError("dt and velocity_time_constant must be positive")
        if self.gust_period <= 0 or self.duration_limit <= 0:
            raise ValueError("gust_period and duration_limit must be positive")

    def wind_at(self, t: float) -> np.ndarray:
        w = np.asarray(self.wind, dtype=float)
        if self.gust_amplitude == 0:
            return w
        norm = np.linalg.norm(w)
        axis = w / norm if norm > 0 else np.array([1.0, 0.0, 0.0])
        return w + self.gust_amplitude * math.sin(2 * math.pi * t / self.gust_period) * axis


@dataclass(frozen=True)
class RoutineDefaults:
    standoff: float = 4.5
    girder_along: float = 2.5
    column_along: float = 0.0
    nominal_speed: float = 0.5

    def spec(self, kind: RoutineKind) -> RoutineSpec:
        along = self.column_along if kind.is_column else self.girder_along
        return RoutineSpec(kind, self.standoff, along, self.nominal_speed)


@dataclass(frozen=True)
class MissionConfig:
    sim: SimConfig = field(default_factory=SimConfig)
    lidar: LidarSpec = field(default_factory=LidarSpec)
    perception: PerceptionConfig = field(default_factory=PerceptionConfig)
    control: ControlConfig = field(default_factory=ControlConfig)
    routine: RoutineDefaults = field(default_factory=RoutineDefaults)
    supervisor: SupervisorConfig = field(default_factory=SupervisorConfig)


@dataclass(frozen=True)
class Sample:
    t: float
    state: UavState
    routine: str
    standoff_err: float
    along_err: float

    def row(self) -> tuple:
        x, y, z = self.state.position
        vx, vy, vz = self.state.velocity
        return (self.t, x, y, z, self.state.yaw, self.routine, self.standoff_err, self.along_err, vx, vy, vz)


@dataclass(frozen=True)
class PhaseMark:
    """Start of a flown phase; ``kind`` is what ended the previous one."""

    t: float
    kind: str  # start | switch | transfer
    leg: int
    approach: bool
    routine: str
    trigger: str
    pose: Pose


@dataclass
class TrajectoryLog:
    samples: list[Sample] = field(default_factory=list)
    events: list[SwitchEvent] = field(default_factory=list)
    phases: list[PhaseMark] = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    completed: bool = False
    diagnostic: str = ""
    model: BridgeModel | None = None


def step_dynamics(s: UavState, cmd: VelocityCommand, c: SimConfig, t: float) -> UavState:
    v = np.asarray(s.velocity, dtype=float)
    target = body_to_world(cmd.v_body, s.yaw) + c.wind_at(t)
    v = v + (target - v) * (c.dt / c.velocity_time_constant)
    p = np.asarray(s.position, dtype=float) + v * c.dt
    return UavState(tuple(p.tolist()), tuple(v.tolist()), s.yaw + cmd.yaw_rate * c.dt)


def _outward_normal(surf) -> np.ndarray:
    """Face normal pointing to the inspected (-y) side."""
    n = np.asarray(surf.plane_normal, dtype=float)
    return -n if n[1] > 0 or (n[1] == 0 and n[0] > 0) else n


def tracking_truth(m: BridgeModel, surface_id: str, position) -> tuple[float, float]:
    """Ground-truth (standoff, along offset) of ``position`` to a surface.

    Girders: depth below the top edge. Columns: lateral offset from the face
    center, positive to the right when facing the face.
    """
    surf = m.in_meters().surface(surface_id)
    p = np.asarray(position, dtype=float)
    n = _outward_normal(surf)
    standoff = float((p - np.asarray(surf.corner)) @ n)
    if surf.kind is SurfaceKind.COLUMN:
        right = np.cross(-n, [0.0, 0.0, 1.0])
        along = float((p - np.asarray(surf.center)) @ right)
    else:
        along = float(surf.z_range[1] - p[2])
    return standoff, along


def start_state(m: BridgeModel, surface_id: str, node, standoff: float = 4.5) -> UavState:
    surf = m.in_meters().surface(surface_id)
    n = _outward_normal(surf)
    p = np.asarray(node, dtype=float) + standoff * n
    return UavState(tuple(p.tolist()), (0.0, 0.0, 0.0), math.atan2(-n[1], -n[0]))


def _scan_seed(seed: int, index: int, plane: ScanPlane):
    return (int(seed), int(index), 0 if plane is ScanPlane.HORIZONTAL else 1)


def sense(m: BridgeModel, pose: Pose, cfg: MissionConfig, index: int, t: float) -> ScanFeatures:
    h = simulate_scan(m, pose, ScanPlane.HORIZONTAL, cfg.lidar, _scan_seed(cfg.sim.rng_seed, index, ScanPlane.HORIZONTAL), t)
    v = simulate_scan(m, pose, ScanPlane.VERTICAL, cfg.lidar, _scan_seed(cfg.sim.rng_seed, index, ScanPlane.VERTICAL), t)
    return ScanFeatures.extract(h, v, cfg.perception)


def _steps_per_scan(cfg: MissionConfig) -> int:
    return max(1, int(round(1.0 / (cfg.lidar.scan_rate * cfg.sim.dt))))


def run_mission(m: BridgeModel, plan: InspectionPlan, cfg: MissionConfig = MissionConfig(),
                start: UavState | None = None) -> TrajectoryLog:
    log = TrajectoryLog(model=m)
    if not plan.legs:
        log.completed = True
        log.metrics = compute_metrics(log.samples, log.phases, plan, True, "")
        return log
    sup = Supervisor(plan, m, cfg.supervisor, cfg.perception)
    first = sup.phase
    mm = m.in_meters()
    if start is None:
        idx = plan.legs[0].entry - 1
        n = len(mm.surfaces)
        s0 = mm.surfaces[idx % n]
        node = s0.node_a if idx < n else s0.node_b
        start = start_state(m, first.surface_id, node, cfg.routine.standoff)
    state = start
    period = _steps_per_scan(cfg)
    scan_dt = period * cfg.sim.dt
    ctrl = ControllerState()
    cmd = VelocityCommand()
    routine = sup.active_routine
    phase = sup.phase
    log.phases.append(PhaseMark(0.0, "start", phase.leg_index, phase.approach, routine.value, "", state.pose))
    k = 0
    limit_steps = int(math.floor(cfg.sim.duration_limit / cfg.sim.dt + 1e-9))
    while k <= limit_steps:
        t = k * cfg.sim.dt
        if k % period == 0:
            pose = state.pose
            feats = sense(m, pose, cfg, k // period, t)
            prev_phase = sup.phase
            new_routine, event = sup.step(feats, t, pose)
            if event is not None:
                log.events.append(event)
            if sup.completed:
                log.completed = True
                log.samples.append(_sample(m, t, state, None, "hover", cfg))
                break
            if sup.phase is not prev_phase:
                ph = sup.phase
                kind = "switch" if event is not None else "transfer"
                log.phases.append(PhaseMark(t, kind, ph.leg_index, ph.approach, new_routine.value,
                                            prev_phase.end, pose))
                ctrl = ControllerState()
            routine = new_routine
            spec = cfg.routine.spec(routine)
            est = estimate_surface(routine, feats, cfg.perception, cfg.lidar, t)
            cmd, ctrl = routine_command(spec, est, ctrl, scan_dt, cfg.control, t)
            travel = {"forward": 0, "left": 1, "up": 2}[spec.travel_axis]
            sup.record_travel(cmd.v_body[travel] * scan_dt)
        log.samples.append(_sample(m, t, state, sup.phase.surface_id, routine.value, cfg))
        state = step_dynamics(state, cmd, cfg.sim, t)
        k += 1
    if not log.completed:
        ph = sup.phase
        leg = plan.legs[ph.leg_index]
        what = f"approach to leg {ph.leg_index}" if ph.approach else f"leg {ph.leg_index}"
        log.diagnostic = (
            f"timeout after {cfg.sim.duration_limit:g} s: stuck on {what} "
            f"({leg.surface_id} {leg.routine.value}), flying {ph.routine.value} on {ph.surface_id} "
            f"waiting for {ph.end}"
        )
    log.metrics = compute_metrics(log.samples, log.phases, plan, log.completed, log.diagnostic)
    return log


def _sample(m, t, state, surface_id, routine, cfg: MissionConfig) -> Sample:
    if surface_id is None:
        return Sample(t, state, routine, math.nan, math.nan)
    standoff, along = tracking_truth(m, surface_id, state.position)
    kind = RoutineKind(routine)
    along_sp = cfg.routine.column_along if kind.is_column else cfg.routine.girder_along
    return Sample(t, state, routine, standoff - cfg.routine.standoff, along - along_sp)


def run_routine(m: BridgeModel, kind: RoutineKind, surface_id: str, start: UavState,
                duration: float, cfg: MissionConfig = MissionConfig()) -> TrajectoryLog:
    """Fly one routine open-ended (no supervisor) for ``duration`` seconds."""
    log = TrajectoryLog(model=m)
    period = _steps_per_scan(cfg)
    scan_dt = period * cfg.sim.dt
    spec = cfg.routine.spec(kind)
    ctrl, cmd, state = ControllerState(), VelocityCommand(), start
    steps = int(round(duration / cfg.sim.dt))
    for k in range(steps + 1):
        t = k * cfg.sim.dt
        if k % period == 0:
            feats = sense(m, state.pose, cfg, k // period, t)
            est = estimate_surface(kind, feats, cfg.perception, cfg.lidar, t)
            cmd, ctrl = routine_command(spec, est, ctrl, scan_dt, cfg.control, t)
        log.samples.append(_sample(m, t, state, surface_id, kind.value, cfg))
        state = step_dynamics(state, cmd, cfg.sim, t)
    log.completed = True
    return log


# -- metrics and export -------------------------------------------------------


def _stats(values) -> dict:
    a = np.asarray([v for v in values if math.isfinite(v)], dtype=float)
    if a.size == 0:
        return {"max": 0.0, "rms": 0.0}
    return {"max": float(np.max(np.abs(a))), "rms": float(math.sqrt(float(np.mean(a * a))))}


def _phase_of(times, phase_starts) -> np.ndarray:
    return np.searchsorted(np.asarray(phase_starts, dtype=float), np.asarray(times, dtype=float), side="right") - 1


def compute_metrics(samples, phases, plan: InspectionPlan, completed: bool, diagnostic: str) -> dict:
    """Summary metrics; depends only on data also written by ``export_log``."""
    times = [s.t for s in samples]
    idx = _phase_of(times, [p.t for p in phases]) if phases else np.zeros(len(samples), dtype=int)
    legs = []
    for i, leg in enumerate(plan.legs):
        own = [j for j, s in enumerate(samples)
               if phases and idx[j] >= 0 and phases[idx[j]].leg == i and not phases[idx[j]].approach
               and s.routine != "hover"]
        so = _stats(samples[j].standoff_err for j in own)
        al = _stats(samples[j].along_err for j in own)
        legs.append({
            "leg": i,
            "surface": leg.surface_id,
            "routine": leg.routine.value,
            "samples": len(own),
            "max_standoff_err": so["max"],
            "rms_standoff_err": so["rms"],
            "max_along_err": al["max"],
            "rms_along_err": al["rms"],
        })
    return {
        "completed": bool(completed),
        "mission_time": float(times[-1]) if times else 0.0,
        "switch_events": sum(1 for p in phases if p.kind == "switch"),
        "transfers": sum(1 for p in phases if p.kind == "transfer"),
        "diagnostic": diagnostic,
        "legs": legs,
    }


def log_to_csv(log: TrajectoryLog) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for s in log.samples:
        w.writerow([repr(v) if isinstance(v, float) else v for v in s.row()])
    return buf.getvalue()


PHASE_HEADER = ("t", "kind", "leg", "approach", "routine", "trigger", "x", "y", "z", "yaw")


def phases_to_csv(log: TrajectoryLog) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PHASE_HEADER)
    for p in log.phases:
        w.writerow([repr(p.t), p.kind, p.leg, int(p.approach), p.routine, p.trigger,
                    *(repr(float(v)) for v in p.pose)])
    return buf.getvalue()


def read_csv_log(text: str) -> list[Sample]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError("unexpected trajectory CSV header")
    out = []
    for r in rows[1:]:
        t, x, y, z, yaw = map(float, r[:5])
        vx, vy, vz = map(float, r[8:11])
        out.append(Sample(t, UavState((x, y, z), (vx, vy, vz), yaw), r[5], float(r[6]), float(r[7])))
    return out


def read_phases(text: str) -> list[PhaseMark]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != PHASE_HEADER:
        raise ValueError("unexpected events CSV header")
    return [
        PhaseMark(float(r[0]), r[1], int(r[2]), r[3] == "1", r[4], r[5], Pose(*map(float, r[6:10])))
        for r in rows[1:]
    ]


def export_log(log: TrajectoryLog, outdir, plan: InspectionPlan | None = None) -> dict:
    """Write trajectory.csv, events.csv, metrics.json and trajectory.svg."""
    from bridgeinspect.svg import trajectory_svg

    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "csv": out / "trajectory.csv",
        "events": out / "events.csv",
        "metrics": out / "metrics.json",
        "svg": out / "trajectory.svg",
    }
    paths["csv"].write_text(log_to_csv(log))
    paths["events"].write_text(phases_to_csv(log))
    doc = dict(log.metrics)
    if plan is not None:
        doc["plan"] = [{"surface": g.surface_id, "routine": g.routine.value, "entry": g.entry, "exit": g.exit}
                       for g in plan.legs]
    paths["metrics"].write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    paths["svg"].write_text(trajectory_svg(log))
    return paths
