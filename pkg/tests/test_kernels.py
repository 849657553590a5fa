"""The compiled and numpy kernels must agree; the fallback must be importable alone."""

import math
import os
import subprocess
import sys

import numpy as np
import pytest

from bridgeinspect import _kernels_py, kernels

BACKENDS = kernels.backends()
needs_ext = pytest.mark.skipif("cython" not in BACKENDS, reason="extension not built")


def rects(rng, k):
    corners = rng.uniform(-10, 10, (k, 3))
    e1 = rng.uniform(-5, 5, (k, 3))
    e2 = np.cross(e1, rng.normal(size=(k, 3)))
    e2 *= rng.uniform(0.5, 3, (k, 1)) / np.linalg.norm(e2, axis=1, keepdims=True)
    n = np.cross(e1, e2)
    n /= np.linalg.norm(n, axis=1, keepdims=True)
    return corners, e1, e2, n


def test_fallback_selected_by_env():
    code = "from bridgeinspect import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, BRIDGEINSPECT_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_backend_name():
    assert kernels.BACKEND in BACKENDS


def test_raycast_against_linear_solve():
    rng = np.random.default_rng(1)
    corners, e1, e2, n = rects(rng, 6)
    origin = np.array([0.5, -0.25, 0.1])
    dirs = rng.normal(size=(300, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    got = _kernels_py.raycast(origin, dirs, corners, e1, e2, n)
    for d, g in zip(dirs, got):
        best = math.inf
        for c, a, b in zip(corners, e1, e2):
            m = np.column_stack([-d, a, b])
            if abs(np.linalg.det(m)) < 1e-12:
                continue
            t, u, v = np.linalg.solve(m, origin - c)
            if t > 0 and 0 <= u <= 1 and 0 <= v <= 1:
                best = min(best, t)
        assert g == pytest.approx(best, rel=1e-9) if math.isfinite(best) else math.isinf(g)


@needs_ext
def test_raycast_backends_agree():
    rng = np.random.default_rng(2)
    corners, e1, e2, n = rects(rng, 11)
    dirs = rng.normal(size=(360, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    origin = np.zeros(3)
    a = _kernels_py.raycast(origin, dirs, corners, e1, e2, n)
    b = BACKENDS["cython"].raycast(origin, dirs, corners, e1, e2, n)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=0)


@needs_ext
def test_hough_backends_agree():
    rng = np.random.default_rng(3)
    x, y = rng.uniform(-10, 10, 200), rng.uniform(-10, 10, 200)
    th = np.arange(180) * math.pi / 180
    args = (x, y, np.cos(th), np.sin(th), -15.0, 0.05, 600)
    np.testing.assert_array_equal(_kernels_py.hough_vote(*args), BACKENDS["cython"].hough_vote(*args))


def test_hough_vote_counts_each_point_once_per_angle():
    x = np.array([1.0, 2.0, 3.0])
    y = np.array([0.5, 0.5, 0.5])
    th = np.arange(180) * math.pi / 180
    acc = kernels.hough_vote(x, y, np.cos(th), np.sin(th), -5.0, 0.05, 200)
    assert acc.sum() == 3 * 180
    # the horizontal line y = 0.5 gathers all three votes at theta 0
    assert acc[0].max() == 3 and acc[0].argmax() == int((0.5 + 5.0) / 0.05)


@needs_ext
def test_held_karp_backends_agree():
    rng = np.random.default_rng(4)
    for n in range(2, 9):
        c = rng.uniform(0, 5, (n, n))
        c[rng.random((n, n)) < 0.15] = np.inf
        np.fill_diagonal(c, np.inf)
        a = _kernels_py.held_karp_atsp(c)
        b = BACKENDS["cython"].held_karp_atsp(c)
        assert (math.isinf(a[0]) and math.isinf(b[0])) or (a[0] == pytest.approx(b[0]) and list(a[1]) == list(b[1]))
