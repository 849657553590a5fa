"""Line extraction from scans and the surface offsets derived from them.

Scan-plane coordinates: x along the heading, y along the scan's second axis
(left for the horizontal scanner, up for the vertical one). A line is
described by its inclination ``theta`` in degrees, [0, 180), where 0 is
parallel to x and 90 parallel to y, and by the signed offset ``rho`` along
its normal ``(-sin theta, cos theta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import convolve1d, maximum_filter

from bridgeinspect import kernels
from bridgeinspect.geometry import RoutineKind
from bridgeinspect.lidar import LidarSpec, Scan


class EstimationError(ValueError):
    pass


@dataclass(frozen=True)
class HoughParams:
    theta_bins: int = 180
    rho_bin_width: float = 0.05
    inlier_distance: float = 0.10
    min_inliers: int = 8
    nms_theta_window: int = 5
    nms_rho_window: int = 5
    max_gap: float = 1.0
    max_lines: int = 8

    def __post_init__(self):
        for name in ("theta_bins", "rho_bin_width", "inlier_distance", "min_inliers",
                     "nms_theta_window", "nms_rho_window", "max_gap", "max_lines"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def theta_step(self) -> float:
        return 180.0 / self.theta_bins


@dataclass(frozen=True)
class LineEstimate:
    theta: float
    rho: float
    extent: float
    inlier_count: int
    endpoints: tuple[tuple[float, float], tuple[float, float]]

    @property
    def direction(self) -> np.ndarray:
        t = math.radians(self.theta)
        return np.array([math.cos(t), math.sin(t)])

    @property
    def normal(self) -> np.ndarray:
        t = math.radians(self.theta)
        return np.array([-math.sin(t), math.cos(t)])

    @property
    def top(self) -> tuple[float, float]:
        return max(self.endpoints, key=lambda p: p[1])

    @property
    def bottom(self) -> tuple[float, float]:
        return min(self.endpoints, key=lambda p: p[1])

    def distance(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        return np.abs(pts @ self.normal - self.rho)


@dataclass(frozen=True)
class CharacteristicWindow:
    slope_center: float
    slope_tolerance: float
    extent_min: float
    extent_max: float

    def __post_init__(self):
        if self.slope_tolerance <= 0:
            raise ValueError("slope_tolerance must be positive")
        if not (0 <= self.extent_min < self.extent_max):
            raise ValueError("need 0 <= extent_min < extent_max")

    def matches(self, line: LineEstimate) -> bool:
        return (
            slope_difference(line.theta, self.slope_center) <= self.slope_tolerance
            and self.extent_min <= line.extent <= self.extent_max
        )


GIRDER_WINDOW = CharacteristicWindow(90.0, 15.0, 3.0, 5.0)
COLUMN_WINDOW = CharacteristicWindow(90.0, 15.0, 1.0, 6.0)


@dataclass(frozen=True)
class SurfaceEstimate:
    standoff: float
    along_offset: float
    line: LineEstimate | None
    fresh: bool = True
    along_valid: bool = True
    heading_error: float | None = None
    timestamp: float = 0.0

    def __post_init__(self):
        if self.fresh and not self.standoff > 0:
            raise EstimationError("a fresh estimate needs a positive standoff")


def slope_difference(a: float, b: float) -> float:
    """Smallest difference between two line inclinations, modulo 180 degrees."""
    d = (a - b) % 180.0
    return min(d, 180.0 - d)


def filter_points(s: Scan, near: float, far: float) -> np.ndarray:
    if not near < far:
        raise ValueError("near must be smaller than far")
    keep = (s.ranges >= near) & (s.ranges <= far)
    r, b = s.ranges[keep], s.bearings[keep]
    return np.column_stack([r * np.cos(b), r * np.sin(b)])


def fit_line(pts) -> tuple[float, float]:
    """Total least squares ``(theta_deg, rho)`` through a point set."""
    pts = np.asarray(pts, dtype=float)
    c = pts.mean(axis=0)
    q = pts - c
    _, vecs = np.linalg.eigh(q.T @ q)
    d = vecs[:, -1]
    t = math.atan2(d[1], d[0]) % math.pi
    if t >= math.pi:
        t -= math.pi
    rho = float(-c[0] * math.sin(t) + c[1] * math.cos(t))
    return math.degrees(t), rho


def _line_from(pts, theta: float, rho: float) -> LineEstimate:
    t = math.radians(theta)
    d = np.array([math.cos(t), math.sin(t)])
    n = np.array([-math.sin(t), math.cos(t)])
    proj = pts @ d
    lo, hi = float(proj.min()), float(proj.max())
    foot = rho * n
    ends = (tuple((foot + lo * d).tolist()), tuple((foot + hi * d).tolist()))
    return LineEstimate(theta, rho, hi - lo, int(len(pts)), ends)


def _largest_run(proj: np.ndarray, max_gap: float) -> np.ndarray:
    """Indices (into ``proj``) of the longest stretch without a gap above ``max_gap``."""
    order = np.argsort(proj, kind="stable")
    gaps = np.flatnonzero(np.diff(proj[order]) > max_gap)
    bounds = np.concatenate([[0], gaps + 1, [len(order)]])
    sizes = np.diff(bounds)
    k = int(np.argmax(sizes))
    return order[bounds[k] : bounds[k + 1]]


def hough_accumulator(pts: np.ndarray, p: HoughParams):
    """Vote array plus the (theta, rho) value of every bin."""
    thetas = np.arange(p.theta_bins) * (math.pi / p.theta_bins)
    rho_max = float(np.max(np.hypot(pts[:, 0], pts[:, 1]))) + p.rho_bin_width
    half = int(math.ceil(rho_max / p.rho_bin_width))
    n_rho = 2 * half
    rho_min = -half * p.rho_bin_width
    acc = kernels.hough_vote(pts[:, 0], pts[:, 1], np.cos(thetas), np.sin(thetas),
                             rho_min, p.rho_bin_width, n_rho)
    return acc, np.degrees(thetas), rho_min + (np.arange(n_rho) + 0.5) * p.rho_bin_width


def _peaks(acc: np.ndarray, p: HoughParams):
    # a line between bin centers splits its votes over neighbouring rho bins;
    # a 3-bin band still counts every point at most once per theta
    acc = convolve1d(acc, np.ones(3, dtype=acc.dtype), axis=1, mode="constant")
    k = p.nms_theta_window // 2
    # theta wraps at 180 degrees with rho mirrored; bins are symmetric about 0
    ext = np.vstack([acc[acc.shape[0] - k :, ::-1], acc, acc[:k, ::-1]]) if k else acc
    local = maximum_filter(ext, size=(2 * k + 1, p.nms_rho_window), mode="constant", cval=0)
    local = local[k : k + acc.shape[0]] if k else local
    ti, ri = np.nonzero((acc == local) & (acc >= p.min_inliers))
    votes = acc[ti, ri]
    order = np.lexsort((ri, ti, -votes))
    return list(zip(ti[order].tolist(), ri[order].tolist()))


def hough_lines(points, p: HoughParams = HoughParams()) -> list[LineEstimate]:
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) < p.min_inliers:
        return []
    acc, thetas, rhos = hough_accumulator(pts, p)
    free = np.ones(len(pts), dtype=bool)
    lines = []
    for ti, ri in _peaks(acc, p):
        if free.sum() < p.min_inliers or len(lines) >= p.max_lines:
            break
        t = math.radians(thetas[ti])
        near = free & (np.abs(-pts[:, 0] * math.sin(t) + pts[:, 1] * math.cos(t) - rhos[ri]) <= p.inlier_distance)
        if near.sum() < p.min_inliers:
            continue
        theta, rho = fit_line(pts[near])
        t = math.radians(theta)
        near = free & (np.abs(-pts[:, 0] * math.sin(t) + pts[:, 1] * math.cos(t) - rho) <= p.inlier_distance)
        idx = np.flatnonzero(near)
        if len(idx) < p.min_inliers:
            continue
        run = idx[_largest_run(pts[idx] @ np.array([math.cos(t), math.sin(t)]), p.max_gap)]
        if len(run) < p.min_inliers:
            continue
        theta, rho = fit_line(pts[run])
        lines.append(_line_from(pts[run], theta, rho))
        free[run] = False
    lines.sort(key=lambda ln: (-ln.inlier_count, abs(ln.rho), ln.theta))
    return lines


def select_surface_line(lines, w: CharacteristicWindow) -> LineEstimate | None:
    """Best line inside the window: most inliers, then smallest |rho|."""
    ok = [ln for ln in lines if w.matches(ln)]
    if not ok:
        return None
    return min(ok, key=lambda ln: (-ln.inlier_count, abs(ln.rho), ln.theta, ln.rho, ln.extent))


def endpoint_pad(line: LineEstimate, endpoint, angular_resolution: float) -> float:
    """Half the expected sample spacing at an endpoint of a scanned segment.

    The outermost return sits on average half a spacing inside the true edge.
    """
    p = np.asarray(endpoint, dtype=float)
    r = float(np.hypot(*p))
    if r == 0:
        return 0.0
    cos_inc = max(abs(float(line.normal @ p)) / r, 0.1)
    return 0.5 * r * angular_resolution / cos_inc


def girder_offsets(line: LineEstimate, edge_pad: float = 0.0) -> SurfaceEstimate:
    """Standoff and depth below the girder top from a vertical-scan line."""
    if line.extent <= 0:
        raise EstimationError("zero-extent line")
    top_y = line.top[1] + edge_pad * abs(math.sin(math.radians(line.theta)))
    return SurfaceEstimate(abs(line.rho), top_y, line)


def column_offsets(line: LineEstimate) -> SurfaceEstimate:
    """Standoff and lateral offset from the column center (positive: vehicle right of center)."""
    if line.extent <= 0:
        raise EstimationError("zero-extent line")
    d = line.direction
    if d[1] < 0 or (d[1] == 0 and d[0] < 0):
        d = -d
    mid = 0.5 * (np.asarray(line.endpoints[0]) + np.asarray(line.endpoints[1]))
    return SurfaceEstimate(abs(line.rho), float(mid @ d), line)


def point_count_feature(s: Scan, sector) -> int:
    lo, hi = sector
    width = hi - lo
    if width >= 2 * math.pi:
        return len(s.bearings)
    rel = (s.bearings - lo) % (2 * math.pi)
    return int(np.count_nonzero(rel <= width))


# -- per-scan feature bundle used by the supervisor and the estimator --------


@dataclass(frozen=True)
class PerceptionConfig:
    near: float = 0.5
    far: float = 20.0
    hough: HoughParams = field(default_factory=HoughParams)
    girder_window: CharacteristicWindow = GIRDER_WINDOW
    column_window: CharacteristicWindow = COLUMN_WINDOW
    heading_window: CharacteristicWindow = CharacteristicWindow(90.0, 20.0, 1.0, math.inf)
    column_vertical_window: CharacteristicWindow = CharacteristicWindow(90.0, 15.0, 1.0, math.inf)
    count_sector: tuple[float, float] = (math.radians(-75.0), math.radians(75.0))
    column_below_min_extent: float = 2.0
    column_below_clearance: float = 0.25


@dataclass(frozen=True, eq=False)
class ScanFeatures:
    horiz: Scan
    vert: Scan
    h_lines: list
    v_lines: list

    @classmethod
    def extract(cls, horiz: Scan, vert: Scan, cfg: PerceptionConfig = PerceptionConfig()):
        h = hough_lines(filter_points(horiz, cfg.near, cfg.far), cfg.hough)
        v = hough_lines(filter_points(vert, cfg.near, cfg.far), cfg.hough)
        return cls(horiz, vert, h, v)


def lowest_vertical_line(v_lines, cfg: PerceptionConfig) -> LineEstimate | None:
    """The vertical-scan line reaching lowest; on a column leg this is the column face."""
    cands = [ln for ln in v_lines if cfg.column_vertical_window.matches(ln)]
    if not cands:
        return None
    return min(cands, key=lambda ln: (ln.bottom[1], -ln.inlier_count))


def column_below(v_lines, cfg: PerceptionConfig) -> LineEstimate | None:
    """A column face hanging below the sensor in the vertical scan, if any."""
    cands = [
        ln
        for ln in v_lines
        if cfg.column_vertical_window.matches(ln)
        and ln.extent >= cfg.column_below_min_extent
        and ln.top[1] <= -cfg.column_below_clearance
    ]
    if not cands:
        return None
    return min(cands, key=lambda ln: (-ln.inlier_count, abs(ln.rho)))


def heading_error(line: LineEstimate | None) -> float | None:
    """Yaw of the vehicle away from facing the surface, radians, counter-clockwise positive."""
    if line is None:
        return None
    return math.radians(90.0 - line.theta)


def estimate_surface(
    routine: RoutineKind,
    feats: ScanFeatures,
    cfg: PerceptionConfig = PerceptionConfig(),
    lidar: LidarSpec = LidarSpec(),
    timestamp: float = 0.0,
) -> SurfaceEstimate | None:
    """Offsets the active routine regulates, or ``None`` when the surface is not seen."""
    heading_line = select_surface_line(feats.h_lines, cfg.heading_window)
    if routine.is_girder:
        line = select_surface_line(feats.v_lines, cfg.girder_window)
        if line is None:
            return None
        est = girder_offsets(line, endpoint_pad(line, line.top, lidar.angular_resolution))
        return SurfaceEstimate(est.standoff, est.along_offset, line, True, True,
                               heading_error(heading_line), timestamp)
    if routine.is_column:
        line = select_surface_line(feats.h_lines, cfg.column_window)
        if line is not None:
            est = column_offsets(line)
            return SurfaceEstimate(est.standoff, est.along_offset, line, True, True,
                                   heading_error(line), timestamp)
        # column not yet in the horizontal plane: hold standoff from the vertical cut
        line = lowest_vertical_line(feats.v_lines, cfg)
        if line is None:
            return None
        return SurfaceEstimate(abs(line.rho), 0.0, line, True, False,
                               heading_error(heading_line), timestamp)
    raise EstimationError(f"routine {routine.value} has no estimator")
