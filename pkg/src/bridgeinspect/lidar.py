"""Synthetic 2D lidar scans of the bridge by ray casting.

Bearings are measured in the scan plane from the vehicle heading. For the
horizontal scanner they turn counter-clockwise seen from above (toward the
vehicle's left); for the vertical scanner they turn from the heading toward
world up.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from bridgeinspect import kernels
from bridgeinspect.geometry import BridgeModel


class Pose(NamedTuple):
    x: float
    y: float
    z: float
    yaw: float

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


class ScanPlane(enum.Enum):
    HORIZONTAL = "h"
    VERTICAL = "v"


@dataclass(frozen=True)
class LidarSpec:
    max_range: float = 40.0
    angular_resolution: float = 2 * math.pi / 360
    scan_rate: float = 2.0
    range_noise_sigma: float = 0.01
    min_range: float = 0.3

    def __post_init__(self):
        if not (0 < self.min_range < self.max_range):
            raise ValueError("need 0 < min_range < max_range")
        if not (0 < self.scan_rate <= 10.0):
            raise ValueError("scan_rate must lie in (0, 10] Hz")
        if self.range_noise_sigma < 0:
            raise ValueError("range_noise_sigma must be >= 0")
        if self.angular_resolution <= 0:
            raise ValueError("angular_resolution must be positive")

    @property
    def n_rays(self) -> int:
        return int(round(2 * math.pi / self.angular_resolution))

    @property
    def bearings(self) -> np.ndarray:
        n = self.n_rays
        return np.arange(n) * (2 * math.pi / n)


@dataclass(frozen=True, eq=False)
class Scan:
    plane: ScanPlane
    pose: Pose
    bearings: np.ndarray
    ranges: np.ndarray
    timestamp: float = 0.0

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.bearings.tolist(), self.ranges.tolist()))

    def __len__(self):
        return len(self.ranges)


def scan_axes(pose: Pose, plane: ScanPlane):
    """World unit vectors of the scan plane's first (bearing 0) and second axes."""
    c, s = math.cos(pose.yaw), math.sin(pose.yaw)
    forward = np.array([c, s, 0.0])
    if plane is ScanPlane.HORIZONTAL:
        second = np.array([-s, c, 0.0])
    else:
        second = np.array([0.0, 0.0, 1.0])
    return forward, second


def ray_directions(pose: Pose, plane: ScanPlane, bearings) -> np.ndarray:
    a, b = scan_axes(pose, plane)
    bearings = np.asarray(bearings, dtype=float)
    return np.cos(bearings)[:, None] * a[None, :] + np.sin(bearings)[:, None] * b[None, :]


@functools.lru_cache(maxsize=16)
def _rectangles(m: BridgeModel):
    m = m.in_meters()
    corners = np.array([s.corner for s in m.surfaces])
    e1 = np.array([s.edge_u for s in m.surfaces])
    e2 = np.array([s.edge_v for s in m.surfaces])
    normals = np.array([s.plane_normal for s in m.surfaces])
    return corners, e1, e2, normals


def true_ranges(m: BridgeModel, pose: Pose, plane: ScanPlane, bearings) -> np.ndarray:
    """Noise-free distance to the nearest surface along each bearing (``inf`` if none)."""
    corners, e1, e2, normals = _rectangles(m)
    dirs = ray_directions(pose, plane, bearings)
    return kernels.raycast(pose.position, dirs, corners, e1, e2, normals)


def simulate_scan(
    m: BridgeModel,
    pose: Pose,
    plane: ScanPlane,
    spec: LidarSpec = LidarSpec(),
    rng_seed=0,
    timestamp: float = 0.0,
) -> Scan:
    if not all(math.isfinite(v) for v in pose):
        raise ValueError(f"pose must be finite: {pose}")
    bearings = spec.bearings
    hit = true_ranges(m, pose, plane, bearings)
    noise = np.random.default_rng(rng_seed).normal(0.0, 1.0, bearings.size) * spec.range_noise_sigma
    ranges = hit + noise
    keep = (hit <= spec.max_range) & (ranges >= spec.min_range) & (ranges <= spec.max_range)
    return Scan(plane, pose, bearings[keep], ranges[keep], timestamp)


def scan_to_csv(scan: Scan) -> str:
    rows = ["bearing,range"]
    rows += [f"{b:.6f},{r:.6f}" for b, r in zip(scan.bearings, scan.ranges)]
    return "\n".join(rows) + "\n"
