"""Bridge world model: planar surfaces, coverage nodes and adjacency.

World frame: x runs along the bridge, z is up. Configuration files are TOML::

    distance_scale = 1.0

    [[surface]]
    id = "A"
    kind = "column"
    vertices = [[...], [...], [...], [...]]
    node_a = [x, y, z]
    node_b = [x, y, z]

    adjacency = [["A", "B"], ...]

Vertices are given in boundary order; the first, second and fourth vertex
span the rectangle.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import tomli
import tomli_w

COPLANAR_TOL = 1e-6
NODE_PLANE_TOL = 0.5
ADJACENT_DIST = 1.0


class Point3(NamedTuple):
    x: float
    y: float
    z: float


class SurfaceKind(enum.Enum):
    GIRDER = "girder"
    COLUMN = "column"
    TOP = "top"
    BOTTOM = "bottom"


class RoutineKind(enum.Enum):
    GR = "GR"
    GL = "GL"
    CU = "CU"
    CD = "CD"
    BR = "BR"
    BL = "BL"
    TR = "TR"
    TL = "TL"

    @property
    def opposite(self) -> RoutineKind:
        return _OPPOSITE[self]

    @property
    def is_girder(self) -> bool:
        return self in (RoutineKind.GR, RoutineKind.GL)

    @property
    def is_column(self) -> bool:
        return self in (RoutineKind.CU, RoutineKind.CD)


_OPPOSITE = {
    RoutineKind.GR: RoutineKind.GL,
    RoutineKind.GL: RoutineKind.GR,
    RoutineKind.CU: RoutineKind.CD,
    RoutineKind.CD: RoutineKind.CU,
    RoutineKind.BR: RoutineKind.BL,
    RoutineKind.BL: RoutineKind.BR,
    RoutineKind.TR: RoutineKind.TL,
    RoutineKind.TL: RoutineKind.TR,
}

# (toward +x, toward -x) routine per longitudinal surface kind
_LONGITUDINAL = {
    SurfaceKind.GIRDER: (RoutineKind.GR, RoutineKind.GL),
    SurfaceKind.TOP: (RoutineKind.TR, RoutineKind.TL),
    SurfaceKind.BOTTOM: (RoutineKind.BR, RoutineKind.BL),
}


class BridgeConfigError(ValueError):
    """Malformed bridge configuration (syntax or schema)."""

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class BridgeValidationError(ValueError):
    """Well-formed configuration that violates a model invariant."""

    def __init__(self, message, surface_id=None, invariant=None):
        self.surface_id = surface_id
        self.invariant = invariant
        super().__init__(message)


class DegenerateLegError(ValueError):
    pass


def _as_point(values, field_name) -> Point3:
    if not isinstance(values, (list, tuple)) or len(values) != 3:
        raise BridgeConfigError("expected 3 numbers", field=field_name)
    out = []
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise BridgeConfigError(f"expected a number, got {v!r}", field=field_name)
        if not math.isfinite(v):
            raise BridgeConfigError("non-finite coordinate", field=field_name)
        out.append(float(v))
    return Point3(*out)


@dataclass(frozen=True)
class SurfacePolygon:
    id: str
    kind: SurfaceKind
    vertices: tuple[Point3, Point3, Point3, Point3]
    node_a: Point3
    node_b: Point3

    @property
    def corner(self) -> np.ndarray:
        return np.asarray(self.vertices[0], dtype=float)

    @property
    def edge_u(self) -> np.ndarray:
        return np.asarray(self.vertices[1], dtype=float) - self.corner

    @property
    def edge_v(self) -> np.ndarray:
        return np.asarray(self.vertices[3], dtype=float) - self.corner

    @property
    def plane_normal(self) -> np.ndarray:
        n = np.cross(self.edge_u, self.edge_v)
        return n / np.linalg.norm(n)

    def plane_distance(self, p) -> float:
        """Unsigned distance from ``p`` to the surface plane."""
        return abs(float(np.dot(np.asarray(p, dtype=float) - self.corner, self.plane_normal)))

    @property
    def z_range(self) -> tuple[float, float]:
        zs = [v.z for v in self.vertices]
        return min(zs), max(zs)

    @property
    def x_range(self) -> tuple[float, float]:
        xs = [v.x for v in self.vertices]
        return min(xs), max(xs)

    @property
    def center(self) -> np.ndarray:
        return np.mean(np.asarray(self.vertices, dtype=float), axis=0)


@dataclass(frozen=True)
class BridgeModel:
    surfaces: tuple[SurfacePolygon, ...]
    adjacency: frozenset[frozenset[str]] = field(default_factory=frozenset)
    distance_scale: float = 1.0

    def __post_init__(self):
        validate_model(self)

    def surface(self, sid: str) -> SurfacePolygon:
        for s in self.surfaces:
            if s.id == sid:
                return s
        raise KeyError(sid)

    @property
    def ids(self) -> list[str]:
        return [s.id for s in self.surfaces]

    def adjacent(self, a: str, b: str) -> bool:
        return frozenset((a, b)) in self.adjacency

    def neighbors(self, sid: str) -> list[str]:
        return sorted(next(iter(p - {sid})) for p in self.adjacency if sid in p)

    def in_meters(self) -> BridgeModel:
        """Copy with coordinates multiplied out so that distance_scale is 1."""
        k = self.distance_scale
        if k == 1.0:
            return self

        def sc(p):
            return Point3(p.x * k, p.y * k, p.z * k)

        surfaces = tuple(
            SurfacePolygon(
                s.id, s.kind, tuple(sc(v) for v in s.vertices), sc(s.node_a), sc(s.node_b)
            )
            for s in self.surfaces
        )
        return BridgeModel(surfaces, self.adjacency, 1.0)


def node_distance(m: BridgeModel, p, q) -> float:
    """Straight-line 3D distance between two points, in meters."""
    d = math.dist(p, q)
    return d * m.distance_scale


def routine_for_leg(s: SurfacePolygon, entry, exit) -> RoutineKind:
    entry = Point3(*entry)
    exit = Point3(*exit)
    if entry == exit:
        raise DegenerateLegError(f"surface {s.id}: entry and exit coincide")
    if s.kind is SurfaceKind.COLUMN:
        return RoutineKind.CU if exit.z > entry.z else RoutineKind.CD
    toward_pos, toward_neg = _LONGITUDINAL[s.kind]
    return toward_pos if exit.x > entry.x else toward_neg


def _validate_surface(s: SurfacePolygon, scale: float):
    verts = np.asarray(s.vertices, dtype=float)
    u, v = s.edge_u, s.edge_v
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0 or np.linalg.norm(np.cross(u, v)) < 1e-12 * nu * nv:
        raise BridgeValidationError(
            f"surface {s.id}: degenerate rectangle", s.id, "non-degenerate rectangle"
        )
    n = s.plane_normal
    off = np.abs((verts - verts[0]) @ n) * scale
    if off.max() > COPLANAR_TOL:
        raise BridgeValidationError(
            f"surface {s.id}: vertices not coplanar (off by {off.max():.3g} m)",
            s.id,
            "coplanar vertices",
        )
    if abs(np.dot(u, v)) > 1e-6 * nu * nv or np.linalg.norm(verts[2] - (verts[1] + v)) * scale > 1e-6:
        raise BridgeValidationError(
            f"surface {s.id}: vertices do not form a rectangle", s.id, "rectangle"
        )
    if s.node_a == s.node_b:
        raise BridgeValidationError(f"surface {s.id}: node_a equals node_b", s.id, "distinct nodes")
    for name, node in (("node_a", s.node_a), ("node_b", s.node_b)):
        if s.plane_distance(node) * scale > NODE_PLANE_TOL:
            raise BridgeValidationError(
                f"surface {s.id}: {name} is more than {NODE_PLANE_TOL} m from the surface plane",
                s.id,
                "node near plane",
            )
    delta = np.abs(np.subtract(s.node_b, s.node_a))
    axis = int(np.argmax(delta))
    expected = 2 if s.kind is SurfaceKind.COLUMN else 0
    if axis != expected:
        raise BridgeValidationError(
            f"surface {s.id}: nodes of a {s.kind.value} must differ mainly along "
            f"{'z' if expected == 2 else 'x'}",
            s.id,
            "node axis",
        )


def validate_model(m: BridgeModel):
    if not (math.isfinite(m.distance_scale) and m.distance_scale > 0):
        raise BridgeValidationError("distance_scale must be positive", invariant="distance_scale")
    seen = set()
    for s in m.surfaces:
        if s.id in seen:
            raise BridgeValidationError(f"duplicate surface id {s.id!r}", s.id, "unique ids")
        seen.add(s.id)
        _validate_surface(s, m.distance_scale)
    for pair in m.adjacency:
        if len(pair) != 2:
            raise BridgeValidationError(
                f"adjacency pair {sorted(pair)} must name two distinct surfaces",
                invariant="adjacency",
            )
        a, b = sorted(pair)
        for sid in (a, b):
            if sid not in seen:
                raise BridgeValidationError(
                    f"adjacency names unknown surface {sid!r}", sid, "adjacency"
                )
        va = np.asarray(m.surface(a).vertices, dtype=float)
        vb = np.asarray(m.surface(b).vertices, dtype=float)
        gap = np.min(np.linalg.norm(va[:, None, :] - vb[None, :, :], axis=2)) * m.distance_scale
        if gap >= ADJACENT_DIST:
            raise BridgeValidationError(
                f"surfaces {a} and {b} are declared adjacent but {gap:.2f} m apart",
                a,
                "adjacent surfaces touch",
            )


_TOP_KEYS = {"distance_scale", "surface", "adjacency"}
_SURFACE_KEYS = {"id", "kind", "vertices", "node_a", "node_b"}


def load_bridge(config_text: str) -> BridgeModel:
    try:
        doc = tomli.loads(config_text)
    except tomli.TOMLDecodeError as exc:
        line = getattr(exc, "lineno", None)
        if line is None:
            import re

            found = re.search(r"line (\d+)", str(exc))
            line = int(found.group(1)) if found else None
        raise BridgeConfigError(f"TOML syntax error: {exc}", line=line) from exc
    return bridge_from_dict(doc)


def bridge_from_dict(doc: dict) -> BridgeModel:
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise BridgeConfigError("unknown top-level field", field=sorted(unknown)[0])
    scale = doc.get("distance_scale", 1.0)
    if isinstance(scale, bool) or not isinstance(scale, (int, float)):
        raise BridgeConfigError("expected a number", field="distance_scale")
    raw_surfaces = doc.get("surface", [])
    if not isinstance(raw_surfaces, list) or not raw_surfaces:
        raise BridgeConfigError("at least one [[surface]] table is required", field="surface")

    surfaces = []
    for i, raw in enumerate(raw_surfaces):
        prefix = f"surface[{i}]"
        if not isinstance(raw, dict):
            raise BridgeConfigError("expected a table", field=prefix)
        extra = set(raw) - _SURFACE_KEYS
        if extra:
            raise BridgeConfigError("unknown field", field=f"{prefix}.{sorted(extra)[0]}")
        missing = _SURFACE_KEYS - set(raw)
        if missing:
            raise BridgeConfigError("missing field", field=f"{prefix}.{sorted(missing)[0]}")
        sid = raw["id"]
        if not isinstance(sid, str) or len(sid) != 1:
            raise BridgeConfigError("surface id must be a single character", field=f"{prefix}.id")
        try:
            kind = SurfaceKind(raw["kind"])
        except ValueError:
            raise BridgeConfigError(
                f"kind must be one of {[k.value for k in SurfaceKind]}", field=f"{prefix}.kind"
            ) from None
        verts = raw["vertices"]
        if not isinstance(verts, list) or len(verts) != 4:
            raise BridgeConfigError("expected 4 vertices", field=f"{prefix}.vertices")
        vertices = tuple(_as_point(v, f"{prefix}.vertices[{j}]") for j, v in enumerate(verts))
        surfaces.append(
            SurfacePolygon(
                sid,
                kind,
                vertices,
                _as_point(raw["node_a"], f"{prefix}.node_a"),
                _as_point(raw["node_b"], f"{prefix}.node_b"),
            )
        )

    raw_adj = doc.get("adjacency", [])
    if not isinstance(raw_adj, list):
        raise BridgeConfigError("expected a list of id pairs", field="adjacency")
    adjacency = set()
    for j, pair in enumerate(raw_adj):
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(isinstance(p, str) for p in pair)
        ):
            raise BridgeConfigError("expected a pair of surface ids", field=f"adjacency[{j}]")
        adjacency.add(frozenset(pair))
    return BridgeModel(tuple(surfaces), frozenset(adjacency), float(scale))


def dump_bridge(m: BridgeModel) -> str:
    """Serialize to the configuration format; inverse of :func:`load_bridge`."""
    doc = {
        "distance_scale": m.distance_scale,
        "surface": [
            {
                "id": s.id,
                "kind": s.kind.value,
                "vertices": [list(v) for v in s.vertices],
                "node_a": list(s.node_a),
                "node_b": list(s.node_b),
            }
            for s in m.surfaces
        ],
        "adjacency": sorted(sorted(p) for p in m.adjacency),
    }
    return tomli_w.dumps(doc)


def load_bridge_file(path) -> BridgeModel:
    with open(path, encoding="utf-8") as fh:
        return load_bridge(fh.read())


def bundled_bridge(name: str) -> BridgeModel:
    """Load one of the packaged example bridges (``viaduct``, ``short_span``)."""
    from importlib.resources import files

    text = files("bridgeinspect.data").joinpath(f"{name}_bridge.toml").read_text(encoding="utf-8")
    return load_bridge(text)
