"""Coverage tour planning over surface clusters."""

from bridgeinspect.planner.exact import EXACT_CLUSTER_LIMIT, solve_exact
from bridgeinspect.planner.heuristic import SolverParams, greedy_tour, solve_heuristic
from bridgeinspect.planner.instance import (
    GtspInstance,
    GtspNode,
    InfeasibleCoverageError,
    InstanceTooLargeError,
    InstanceTooSmallError,
    Tour,
    build_instance,
    instance_from_positions,
    prune_infeasible,
    random_instance,
)
from bridgeinspect.planner.noon_bean import (
    NoonBeanMapping,
    noon_bean_transform,
    solve_atsp,
    solve_atsp_bruteforce,
    solve_via_noon_bean,
)
from bridgeinspect.planner.plan import (
    InspectionPlan,
    Leg,
    dump_plan,
    expand_sequence,
    expand_tour,
    load_plan,
    plan_bridge,
)

__all__ = [
    "EXACT_CLUSTER_LIMIT",
    "GtspInstance",
    "GtspNode",
    "InfeasibleCoverageError",
    "InspectionPlan",
    "InstanceTooLargeError",
    "InstanceTooSmallError",
    "Leg",
    "NoonBeanMapping",
    "SolverParams",
    "Tour",
    "build_instance",
    "dump_plan",
    "expand_sequence",
    "expand_tour",
    "greedy_tour",
    "instance_from_positions",
    "load_plan",
    "noon_bean_transform",
    "plan_bridge",
    "prune_infeasible",
    "random_instance",
    "solve_atsp",
    "solve_atsp_bruteforce",
    "solve_exact",
    "solve_heuristic",
    "solve_via_noon_bean",
]
