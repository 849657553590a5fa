import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bridgeinspect.geometry import load_bridge
from bridgeinspect.lidar import LidarSpec, Pose, ScanPlane, scan_to_csv, simulate_scan
from bridgeinspect.perception import filter_points, fit_line

FACING = math.pi / 2

WALL = load_bridge(
    '[[surface]]\nid = "W"\nkind = "girder"\n'
    "vertices = [[-500, 0, -500], [500, 0, -500], [500, 0, 500], [-500, 0, 500]]\n"
    "node_a = [-400, 0, 0]\nnode_b = [400, 0, 0]\n"
)

NOISELESS = LidarSpec(range_noise_sigma=0.0)


def oracle_range(model, pose, plane, bearing):
    """Nearest hit by solving origin + t d = corner + u e1 + v e2 for every face."""
    c, s = math.cos(pose.yaw), math.sin(pose.yaw)
    fwd = np.array([c, s, 0.0])
    second = np.array([-s, c, 0.0]) if plane is ScanPlane.HORIZONTAL else np.array([0.0, 0.0, 1.0])
    d = math.cos(bearing) * fwd + math.sin(bearing) * second
    o = np.array(pose[:3])
    best = math.inf
    for surf in model.surfaces:
        v = np.asarray(surf.vertices, dtype=float)
        a, b = v[1] - v[0], v[3] - v[0]
        m = np.column_stack([-d, a, b])
        if abs(np.linalg.det(m)) < 1e-12:
            continue
        t, u, w = np.linalg.solve(m, o - v[0])
        if t > 0 and -1e-12 <= u <= 1 + 1e-12 and -1e-12 <= w <= 1 + 1e-12:
            best = min(best, t)
    return best


def test_perpendicular_wall():
    spec = LidarSpec(range_noise_sigma=0.01)
    scan = simulate_scan(WALL, Pose(0, -4.5, 0, FACING), ScanPlane.HORIZONTAL, spec, rng_seed=3)
    assert scan.bearings[0] == 0.0
    assert abs(scan.ranges[0] - 4.5) <= 3 * spec.range_noise_sigma


def test_far_from_everything(viaduct):
    scan = simulate_scan(viaduct, Pose(75, -60, 8, FACING), ScanPlane.HORIZONTAL)
    assert len(scan) == 0
    assert scan.points == []


def test_scan_invariants(viaduct):
    spec = LidarSpec()
    scan = simulate_scan(viaduct, Pose(100, -4.5, 13.5, FACING), ScanPlane.VERTICAL, spec, 0)
    assert np.all(np.diff(scan.bearings) > 0)
    assert scan.bearings.min() >= 0 and scan.bearings.max() < 2 * math.pi
    assert np.all((scan.ranges >= spec.min_range) & (scan.ranges <= spec.max_range))


@pytest.mark.parametrize("plane", list(ScanPlane))
@pytest.mark.parametrize("pose", [Pose(100, -4.5, 13.5, FACING), Pose(120.3, -3.9, 6.0, 1.4), Pose(31, -8, 12.2, 2.0)])
def test_noiseless_ranges_match_oracle(viaduct, plane, pose):
    scan = simulate_scan(viaduct, pose, plane, NOISELESS)
    assert len(scan) > 0
    for b, r in zip(scan.bearings, scan.ranges):
        assert r == pytest.approx(oracle_range(viaduct, pose, plane, b), rel=1e-9)
    # and every omitted bearing misses or is out of range
    kept = set(np.round(scan.bearings, 12))
    for b in NOISELESS.bearings:
        if round(b, 12) not in kept:
            exp = oracle_range(viaduct, pose, plane, b)
            assert not (NOISELESS.min_range <= exp <= NOISELESS.max_range)


def test_same_seed_same_scan(viaduct):
    pose = Pose(60, -4.5, 13.5, FACING)
    a = simulate_scan(viaduct, pose, ScanPlane.VERTICAL, LidarSpec(), rng_seed=9)
    b = simulate_scan(viaduct, pose, ScanPlane.VERTICAL, LidarSpec(), rng_seed=9)
    c = simulate_scan(viaduct, pose, ScanPlane.VERTICAL, LidarSpec(), rng_seed=10)
    assert a.ranges.tobytes() == b.ranges.tobytes()
    assert a.ranges.tobytes() != c.ranges.tobytes()


def test_girder_depth_in_vertical_cut(viaduct):
    pose = Pose(75.0, -4.5, 13.5, FACING)
    spec = LidarSpec(range_noise_sigma=0.02)
    scan = simulate_scan(viaduct, pose, ScanPlane.VERTICAL, spec, rng_seed=1)
    pts = filter_points(scan, 0.5, 20.0)
    # analytic hits: bearing b meets the face y=0 at height 4.5 tan b above the sensor
    b = NOISELESS.bearings
    b = np.where(b > math.pi, b - 2 * math.pi, b)
    up = 4.5 * np.tan(b[np.abs(b) < math.pi / 2])
    on = up[(up >= 12.0 - 13.5) & (up <= 16.0 - 13.5)]
    expected_extent = on.max() - on.min()
    face = pts[np.abs(pts[:, 0] - 4.5) < 0.1]
    theta, rho = fit_line(face)
    assert abs(theta - 90.0) < 1.0
    extent = face[:, 1].max() - face[:, 1].min()
    assert extent == pytest.approx(expected_extent, abs=3 * spec.range_noise_sigma)
    assert abs(expected_extent - 4.0) < 0.2


def test_csv_export(viaduct):
    scan = simulate_scan(viaduct, Pose(150, -4.5, 5, FACING), ScanPlane.HORIZONTAL)
    lines = scan_to_csv(scan).splitlines()
    assert lines[0] == "bearing,range"
    assert len(lines) == len(scan) + 1


def test_spec_validation():
    with pytest.raises(ValueError):
        LidarSpec(min_range=50.0)
    with pytest.raises(ValueError):
        LidarSpec(scan_rate=11.0)
    with pytest.raises(ValueError):
        LidarSpec(range_noise_sigma=-1)
    assert LidarSpec().n_rays == 360


def test_nonfinite_pose_rejected(viaduct):
    with pytest.raises(ValueError):
        simulate_scan(viaduct, Pose(math.nan, 0, 0, 0), ScanPlane.HORIZONTAL)


@settings(max_examples=30, deadline=None)
@given(st.floats(1.0, 30.0), st.floats(1.0, 30.0))
def test_point_count_grows_when_approaching(viaduct, d_near, d_far):
    near, far = sorted((d_near, d_far))
    count = lambda d: len(simulate_scan(viaduct, Pose(75.0, -d, 14.0, FACING), ScanPlane.HORIZONTAL, NOISELESS))  # noqa: E731
    assert count(near) >= count(far)
