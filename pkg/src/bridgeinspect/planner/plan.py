"""Turn a solved tour into an ordered list of surface legs and persist it."""

from __future__ import annotations

import time
from dataclasses import dataclass

import tomli
import tomli_w

from bridgeinspect.geometry import BridgeModel, RoutineKind, routine_for_leg
from bridgeinspect.planner.heuristic import SolverParams, solve_heuristic
from bridgeinspect.planner.instance import GtspInstance, Tour, build_instance


@dataclass(frozen=True)
class Leg:
    surface_id: str
    routine: RoutineKind
    entry: int
    exit: int


@dataclass(frozen=True)
class InspectionPlan:
    legs: tuple[Leg, ...]
    expanded_sequence: tuple[int, ...]
    total_cost: float = 0.0
    solve_seconds: float = 0.0

    @property
    def routines(self) -> list[RoutineKind]:
        return [leg.routine for leg in self.legs]


def expand_sequence(entries, partner) -> list[int]:
    """Interleave every entry node with its partner (the exit)."""
    out = []
    for e in entries:
        out.extend((e, partner(e)))
    return out


def expand_tour(t: Tour, inst: GtspInstance, m: BridgeModel) -> InspectionPlan:
    legs = []
    for e in t.entries:
        x = inst.partner(e)
        sid = inst.cluster_of(e)
        legs.append(
            Leg(sid, routine_for_leg(m.surface(sid), inst.node(e).position, inst.node(x).position), e, x)
        )
    return InspectionPlan(tuple(legs), tuple(expand_sequence(t.entries, inst.partner)), t.total_cost)


def plan_bridge(m: BridgeModel, params: SolverParams = SolverParams()):
    """Build, prune and solve; returns ``(plan, instance)``."""
    t0 = time.perf_counter()
    inst = build_instance(m)
    tour = solve_heuristic(inst, params)
    elapsed = time.perf_counter() - t0
    plan = expand_tour(tour, inst, m)
    return (
        InspectionPlan(plan.legs, plan.expanded_sequence, plan.total_cost, elapsed),
        inst,
    )


def dump_plan(plan: InspectionPlan, inst: GtspInstance) -> str:
    doc = {
        "total_cost": plan.total_cost,
        "solve_seconds": plan.solve_seconds,
        "expanded_sequence": list(plan.expanded_sequence),
        "leg": [
            {
                "surface": leg.surface_id,
                "routine": leg.routine.value,
                "entry": leg.entry,
                "exit": leg.exit,
                "entry_position": list(inst.node(leg.entry).position),
                "exit_position": list(inst.node(leg.exit).position),
            }
            for leg in plan.legs
        ],
    }
    return tomli_w.dumps(doc)


def load_plan(text: str) -> InspectionPlan:
    doc = tomli.loads(text)
    legs = tuple(
        Leg(d["surface"], RoutineKind(d["routine"]), int(d["entry"]), int(d["exit"]))
        for d in doc.get("leg", [])
    )
    return InspectionPlan(
        legs,
        tuple(int(v) for v in doc.get("expanded_sequence", [])),
        float(doc.get("total_cost", 0.0)),
        float(doc.get("solve_seconds", 0.0)),
    )
