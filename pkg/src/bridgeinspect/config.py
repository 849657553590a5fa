"""Mission configuration file: plant, sensor, gains, setpoints and predicate thresholds."""

from __future__ import annotations

import dataclasses
import math
from importlib import resources

import tomli

from bridgeinspect.control import ControlConfig, PidGains
from bridgeinspect.lidar import LidarSpec
from bridgeinspect.perception import CharacteristicWindow, HoughParams, PerceptionConfig
from bridgeinspect.sim import MissionConfig, RoutineDefaults, SimConfig
from bridgeinspect.supervisor import SupervisorConfig, TransitionPredicate


class MissionConfigError(ValueError):
    pass


def _build(cls, table: dict, where: str, convert=None):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(table) - names)
    if unknown:
        raise MissionConfigError(f"unknown field(s) in [{where}]: {', '.join(unknown)}")
    kwargs = dict(table)
    for k, fn in (convert or {}).items():
        if k in kwargs:
            kwargs[k] = fn(kwargs[k])
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise MissionConfigError(f"[{where}]: {exc}") from None


def _window(d, where):
    return _build(CharacteristicWindow, d, where)


def _degrees_pair(v):
    return (math.radians(v[0]), math.radians(v[1]))


def _predicate(d, where):
    d = {"name": where.split(".")[-1], **d}
    if "sector_deg" in d:
        d["sector"] = _degrees_pair(d.pop("sector_deg"))
    return _build(TransitionPredicate, d, where)


def mission_from_dict(doc: dict) -> MissionConfig:
    known = {"sim", "lidar", "perception", "control", "routine", "supervisor"}
    unknown = sorted(set(doc) - known)
    if unknown:
        raise MissionConfigError(f"unknown section(s): {', '.join(unknown)}")

    sim = _build(SimConfig, doc.get("sim", {}), "sim", {"wind": tuple})

    lidar = dict(doc.get("lidar", {}))
    if "angular_resolution_deg" in lidar:
        lidar["angular_resolution"] = math.radians(lidar.pop("angular_resolution_deg"))
    lidar = _build(LidarSpec, lidar, "lidar")

    p = dict(doc.get("perception", {}))
    hough = _build(HoughParams, p.pop("hough", {}), "perception.hough")
    windows = {}
    for key in ("girder_window", "column_window", "heading_window", "column_vertical_window"):
        if key in p:
            windows[key] = _window(p.pop(key), f"perception.{key}")
    if "count_sector_deg" in p:
        p["count_sector"] = _degrees_pair(p.pop("count_sector_deg"))
    perception = _build(PerceptionConfig, {**p, **windows, "hough": hough}, "perception")

    c = dict(doc.get("control", {}))
    gains = {k: _build(PidGains, c.pop(k), f"control.{k}") for k in ("standoff_gains", "along_gains") if k in c}
    control = _build(ControlConfig, {**c, **gains}, "control")

    routine = _build(RoutineDefaults, doc.get("routine", {}), "routine")

    s = dict(doc.get("supervisor", {}))
    preds = {k: _predicate(s.pop(k), f"supervisor.{k}")
             for k in ("column_to_girder", "girder_to_column", "descent_end") if k in s}
    supervisor = _build(SupervisorConfig, {**s, **preds}, "supervisor")
    return MissionConfig(sim, lidar, perception, control, routine, supervisor)


def load_mission(text: str) -> MissionConfig:
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise MissionConfigError(f"mission config: {exc}") from None
    return mission_from_dict(doc)


def default_mission_text() -> str:
    return resources.files("bridgeinspect.data").joinpath("mission.toml").read_text()


def default_mission() -> MissionConfig:
    return load_mission(default_mission_text())
