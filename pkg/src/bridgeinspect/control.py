"""Surface-relative velocity controllers for the navigation routines.

Body frame: ``forward`` along the heading (toward the tracked face), ``left``
and ``up``. Every routine regulates standoff on the forward axis, regulates a
second offset on one of the other two axes and flies at a constant speed on
the remaining one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from bridgeinspect.geometry import RoutineKind
from bridgeinspect.perception import SurfaceEstimate

AXES = ("forward", "left", "up")


@dataclass(frozen=True)
class PidGains:
    kp: float = 0.8
    ki: float = 0.05
    kd: float = 0.1
    output_limit: float = 1.5
    integral_limit: float = 0.5

    def __post_init__(self):
        if min(self.kp, self.ki, self.kd) < 0:
            raise ValueError("gains must be non-negative")
        if self.output_limit <= 0 or self.integral_limit <= 0:
            raise ValueError("limits must be positive")


@dataclass(frozen=True)
class PidState:
    integral: float = 0.0
    prev_error: float = 0.0
    initialized: bool = False


def pid_step(state: PidState, g: PidGains, error: float, dt: float) -> tuple[float, PidState]:
    if not dt > 0:
        raise ValueError("dt must be positive")
    integral = state.integral + error * dt
    if g.ki > 0:
        cap = g.integral_limit / g.ki
        integral = min(max(integral, -cap), cap)
    deriv = (error - state.prev_error) / dt if state.initialized else 0.0
    u = g.kp * error + g.ki * integral + g.kd * deriv
    u = min(max(u, -g.output_limit), g.output_limit)
    return u, PidState(integral, error, True)


# (travel axis, travel sign, along axis) per routine
_LAYOUT = {
    RoutineKind.GR: ("left", -1.0, "up"),
    RoutineKind.GL: ("left", 1.0, "up"),
    RoutineKind.CU: ("up", 1.0, "left"),
    RoutineKind.CD: ("up", -1.0, "left"),
    RoutineKind.TR: ("left", -1.0, "up"),
    RoutineKind.TL: ("left", 1.0, "up"),
    RoutineKind.BR: ("left", -1.0, "up"),
    RoutineKind.BL: ("left", 1.0, "up"),
}


@dataclass(frozen=True)
class RoutineSpec:
    kind: RoutineKind
    standoff_setpoint: float = 4.5
    along_setpoint: float | None = None
    nominal_speed: float = 0.5

    def __post_init__(self):
        if self.nominal_speed <= 0:
            raise ValueError("nominal_speed must be positive")
        if self.standoff_setpoint <= 0:
            raise ValueError("standoff_setpoint must be positive")
        if self.along_setpoint is None:
            object.__setattr__(self, "along_setpoint", 0.0 if self.kind.is_column else 2.5)

    @property
    def travel_axis(self) -> str:
        return _LAYOUT[self.kind][0]

    @property
    def travel_sign(self) -> float:
        return _LAYOUT[self.kind][1]

    @property
    def regulated_axes(self) -> tuple[str, str]:
        return ("forward", _LAYOUT[self.kind][2])


@dataclass(frozen=True)
class VelocityCommand:
    v_body: tuple[float, float, float] = (0.0, 0.0, 0.0)
    yaw_rate: float = 0.0
    timestamp: float = 0.0
    held: bool = False
    hover: bool = False

    @property
    def vector(self) -> np.ndarray:
        return np.asarray(self.v_body, dtype=float)


HOVER = VelocityCommand(hover=True)


@dataclass(frozen=True)
class ControlConfig:
    standoff_gains: PidGains = field(default_factory=PidGains)
    along_gains: PidGains = field(default_factory=PidGains)
    yaw_gain: float = 0.5
    yaw_rate_limit: float = 0.5
    failsafe_scans: int = 5

    def __post_init__(self):
        if self.yaw_gain < 0 or self.yaw_rate_limit <= 0 or self.failsafe_scans < 1:
            raise ValueError("invalid yaw or failsafe settings")


@dataclass(frozen=True)
class ControllerState:
    standoff: PidState = PidState()
    along: PidState = PidState()
    last: VelocityCommand = VelocityCommand()
    held_scans: int = 0


def routine_command(
    spec: RoutineSpec,
    est: SurfaceEstimate | None,
    states: ControllerState,
    dt: float,
    cfg: ControlConfig = ControlConfig(),
    timestamp: float = 0.0,
) -> tuple[VelocityCommand, ControllerState]:
    """One control update. ``dt`` is the control period."""
    if est is None or not est.fresh:
        held = states.held_scans + 1
        if held > cfg.failsafe_scans:
            cmd = replace(HOVER, timestamp=timestamp)
        else:
            cmd = replace(states.last, timestamp=timestamp, held=True)
        return cmd, replace(states, last=cmd, held_scans=held)

    v = dict.fromkeys(AXES, 0.0)
    v[spec.travel_axis] = spec.travel_sign * spec.nominal_speed
    # each measurement grows when moving along the negative of its axis
    u, s_state = pid_step(states.standoff, cfg.standoff_gains, spec.standoff_setpoint - est.standoff, dt)
    v["forward"] = -u
    a_state = states.along
    if est.along_valid:
        u, a_state = pid_step(states.along, cfg.along_gains, spec.along_setpoint - est.along_offset, dt)
        v[spec.regulated_axes[1]] = -u
    yaw_rate = 0.0
    if est.heading_error is not None:
        yaw_rate = -cfg.yaw_gain * est.heading_error
        yaw_rate = min(max(yaw_rate, -cfg.yaw_rate_limit), cfg.yaw_rate_limit)
    cmd = VelocityCommand(tuple(v[a] for a in AXES), yaw_rate, timestamp)
    return cmd, ControllerState(s_state, a_state, cmd, 0)


def body_to_world(v_body, yaw: float) -> np.ndarray:
    f, lft, up = v_body
    c, s = math.cos(yaw), math.sin(yaw)
    return np.array([f * c - lft * s, f * s + lft * c, up])
