"""Plan execution: which routine is active and when to hand over to the next.

Legs are flown in plan order. Some consecutive legs do not meet where the
previous one ended (a column descent ends at the foot of the column while the
next girder leg starts at deck level); the supervisor bridges these with an
approach phase that reuses a column routine until the next leg's start
condition is seen.
"""

from __future__ import annotations

import math
import statistics
from collections import deque
from dataclasses import dataclass, field

from bridgeinspect.geometry import BridgeModel, RoutineKind, SurfaceKind
from bridgeinspect.lidar import Pose, Scan
from bridgeinspect.perception import (
    PerceptionConfig,
    ScanFeatures,
    column_below,
    hough_lines,
    filter_points,
    lowest_vertical_line,
    point_count_feature,
)
from bridgeinspect.planner.plan import InspectionPlan, Leg


class PlanUnsupportedError(ValueError):
    pass


@dataclass(frozen=True)
class TransitionPredicate:
    name: str
    sector: tuple[float, float] = (math.radians(-75.0), math.radians(75.0))
    ratio_threshold: float = 2.0
    debounce_scans: int = 3
    geometric_guard: float | None = None
    tolerance: float = 0.5

    def __post_init__(self):
        if not self.ratio_threshold > 1:
            raise ValueError("ratio_threshold must exceed 1")
        if self.debounce_scans < 1:
            raise ValueError("debounce_scans must be >= 1")


@dataclass(frozen=True)
class SupervisorConfig:
    column_to_girder: TransitionPredicate = TransitionPredicate("column_to_girder")
    girder_to_column: TransitionPredicate = TransitionPredicate(
        "girder_to_column", debounce_scans=5, geometric_guard=0.5
    )
    descent_end: TransitionPredicate = TransitionPredicate("descent_end", tolerance=0.5)
    baseline_window: int = 10
    standoff: float = 4.5


@dataclass(frozen=True)
class SwitchEvent:
    from_leg: int
    to_leg: int
    trigger: str
    pose: Pose
    timestamp: float


@dataclass
class SupervisorState:
    plan: InspectionPlan
    leg_index: int = 0
    mode: RoutineKind | None = None
    baseline_count: deque = field(default_factory=lambda: deque(maxlen=10))
    debounce: int = 0
    completed: bool = False
    approach: bool = False
    traveled: float = 0.0

    def reset_predicate(self):
        self.debounce = 0
        self.baseline_count.clear()
        self.traveled = 0.0


def _lines(scan: Scan, lines, cfg: PerceptionConfig):
    if lines is not None:
        return lines
    return hough_lines(filter_points(scan, cfg.near, cfg.far), cfg.hough)


def _debounced(s: SupervisorState, hit: bool, p: TransitionPredicate) -> bool:
    s.debounce = s.debounce + 1 if hit else 0
    return s.debounce >= p.debounce_scans


def detect_column_to_girder(s: SupervisorState, horiz: Scan, p: TransitionPredicate) -> bool:
    """Fires once the horizontal point count jumps above the running baseline."""
    count = point_count_feature(horiz, p.sector)
    if not s.baseline_count:
        s.baseline_count.append(count)
        s.debounce = 0
        return False
    base = statistics.median(s.baseline_count)
    hit = count >= p.ratio_threshold * base
    if not hit:
        s.baseline_count.append(count)
    return _debounced(s, hit, p)


def detect_girder_to_column(
    s: SupervisorState,
    vert: Scan,
    horiz: Scan | None,
    p: TransitionPredicate,
    leg_length: float = 0.0,
    cfg: PerceptionConfig = PerceptionConfig(),
    v_lines=None,
) -> bool:
    """Fires when a column face hangs below the deck in the vertical cut.

    The horizontal scanner flies above the column tops on girder legs, so the
    column is looked for in the vertical scan. ``horiz`` is accepted for
    symmetry with the other detectors but not used.
    """
    seen = column_below(_lines(vert, v_lines, cfg), cfg) is not None
    guard = p.geometric_guard is None or s.traveled >= p.geometric_guard * leg_length
    return _debounced(s, seen and guard, p)


def detect_column_descent_end(
    s: SupervisorState,
    vert: Scan,
    p: TransitionPredicate,
    exit_height: float = 2.5,
    cfg: PerceptionConfig = PerceptionConfig(),
    v_lines=None,
) -> bool:
    """Fires when the sensor is within tolerance of ``exit_height`` above the column foot."""
    line = lowest_vertical_line(_lines(vert, v_lines, cfg), cfg)
    hit = line is not None and (-line.bottom[1]) - exit_height <= p.tolerance
    return _debounced(s, hit, p)


def travel_done(s: SupervisorState, leg_length: float) -> bool:
    return s.traveled >= leg_length


# what ends a phase flown with a given routine, and what it is waiting for
_CU_END, _GIRDER_END, _CD_END, _TRAVEL_END = "column_to_girder", "girder_to_column", "descent_end", "travel"


@dataclass(frozen=True)
class Phase:
    routine: RoutineKind
    surface_id: str
    end: str
    length: float = 0.0
    exit_height: float = 0.0
    leg_index: int = 0
    approach: bool = False


def _column_under(m: BridgeModel, x: float) -> str | None:
    for s in m.surfaces:
        lo, hi = s.x_range
        if s.kind is SurfaceKind.COLUMN and lo <= x <= hi:
            return s.id
    return None


def build_phases(plan: InspectionPlan, m: BridgeModel) -> list[Phase]:
    """Expand plan legs into flown phases; raises if a hand-over has no detector."""
    mm = m.in_meters()
    nodes = {}
    for i, s in enumerate(mm.surfaces):
        nodes[i + 1] = s.node_a
        nodes[len(mm.surfaces) + i + 1] = s.node_b
    phases: list[Phase] = []
    legs = list(plan.legs)
    for i, leg in enumerate(legs):
        if not (leg.routine.is_column or leg.routine.is_girder):
            raise PlanUnsupportedError(f"leg {i}: routine {leg.routine.value} is not flown by the supervisor")
        try:
            entry, exit_ = nodes[leg.entry], nodes[leg.exit]
        except KeyError as exc:
            raise PlanUnsupportedError(f"leg {i}: node {exc.args[0]} not in the bridge model") from None
        surf = mm.surface(leg.surface_id)
        base = surf.z_range[0]
        prev = legs[i - 1] if i else None
        if prev is not None:
            if prev.routine is RoutineKind.CD and leg.routine.is_girder:
                col = prev.surface_id
                phases.append(Phase(RoutineKind.CU, col, _CU_END, leg_index=i, approach=True))
            elif prev.routine.is_girder and leg.routine is RoutineKind.CU:
                phases.append(
                    Phase(RoutineKind.CD, leg.surface_id, _CD_END, exit_height=entry[2] - base,
                          leg_index=i, approach=True)
                )
            elif prev.routine is RoutineKind.CU and leg.routine.is_girder:
                pass
            elif prev.routine.is_girder and leg.routine is RoutineKind.CD:
                pass
            else:
                raise PlanUnsupportedError(
                    f"no transition from {prev.routine.value} (leg {i - 1}) to {leg.routine.value} (leg {i})"
                )
        length = math.dist(entry, exit_)
        if leg.routine is RoutineKind.CU:
            end = _CU_END
        elif leg.routine is RoutineKind.CD:
            end = _CD_END
        else:
            end = _GIRDER_END if _column_under(mm, exit_[0]) else _TRAVEL_END
        phases.append(Phase(leg.routine, leg.surface_id, end, length, exit_[2] - base, i))
    return phases


class Supervisor:
    """Runs the phase list against incoming scan pairs."""

    def __init__(self, plan: InspectionPlan, m: BridgeModel,
                 cfg: SupervisorConfig = SupervisorConfig(),
                 perception: PerceptionConfig = PerceptionConfig()):
        self.model = m
        self.cfg = cfg
        self.perception = perception
        self.phases = build_phases(plan, m)
        self.phase_index = 0
        self.state = SupervisorState(plan, baseline_count=deque(maxlen=cfg.baseline_window))
        self.markers: list[tuple[float, Pose, str]] = []
        self._sync()

    def _sync(self):
        s = self.state
        if self.phase_index >= len(self.phases):
            s.completed = True
            s.mode = None
            s.leg_index = len(s.plan.legs)
            s.approach = False
            return
        ph = self.phases[self.phase_index]
        s.mode = ph.routine
        s.leg_index = ph.leg_index
        s.approach = ph.approach

    @property
    def phase(self) -> Phase | None:
        return self.phases[self.phase_index] if self.phase_index < len(self.phases) else None

    @property
    def completed(self) -> bool:
        return self.state.completed

    @property
    def active_routine(self) -> RoutineKind | None:
        return self.state.mode

    def record_travel(self, distance: float):
        self.state.traveled += abs(distance)

    def _fired(self, ph: Phase, feats: ScanFeatures) -> bool:
        s, c = self.state, self.cfg
        if ph.end == _CU_END:
            return detect_column_to_girder(s, feats.horiz, c.column_to_girder)
        if ph.end == _GIRDER_END:
            return detect_girder_to_column(s, feats.vert, feats.horiz, c.girder_to_column, ph.length,
                                           self.perception, feats.v_lines)
        if ph.end == _CD_END:
            return detect_column_descent_end(s, feats.vert, c.descent_end, ph.exit_height,
                                             self.perception, feats.v_lines)
        return travel_done(s, ph.length)

    def step(self, feats: ScanFeatures, t: float, pose: Pose):
        """Returns ``(routine or None for hover, SwitchEvent or None)``."""
        if self.completed:
            return None, None
        ph = self.phase
        event = None
        if self._fired(ph, feats):
            if ph.approach:
                self.markers.append((t, pose, ph.end))
            elif ph.leg_index + 1 < len(self.state.plan.legs):
                event = SwitchEvent(ph.leg_index, ph.leg_index + 1, ph.end, pose, t)
            self.phase_index += 1
            self.state.reset_predicate()
            self._sync()
        return self.state.mode, event


def step(sup: Supervisor, horiz: Scan, vert: Scan, t: float = 0.0):
    """Functional entry point: extract features and advance ``sup`` by one scan pair."""
    feats = ScanFeatures.extract(horiz, vert, sup.perception)
    mode, event = sup.step(feats, t, horiz.pose)
    return mode, event, sup.state
