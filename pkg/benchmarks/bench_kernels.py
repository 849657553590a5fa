"""Time the compiled kernels against the numpy fallback on realistic inputs.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import math
import timeit

import numpy as np

from bridgeinspect import kernels
from bridgeinspect.geometry import bundled_bridge
from bridgeinspect.lidar import LidarSpec, Pose, ScanPlane, _rectangles, ray_directions, simulate_scan
from bridgeinspect.perception import filter_points
from bridgeinspect.planner import build_instance, noon_bean_transform


def cases():
    m = bundled_bridge("viaduct")
    pose = Pose(120.0, -4.5, 13.5, math.pi / 2)
    corners, e1, e2, normals = _rectangles(m)
    dirs = ray_directions(pose, ScanPlane.VERTICAL, LidarSpec().bearings)
    ray_args = (pose.position, dirs, corners, e1, e2, normals)

    pts = filter_points(simulate_scan(m, pose, ScanPlane.VERTICAL, LidarSpec(), 0), 0.5, 20.0)
    th = np.arange(180) * math.pi / 180
    hough_args = (pts[:, 0].copy(), pts[:, 1].copy(), np.cos(th), np.sin(th), -20.0, 0.05, 800)

    sub = build_instance(bundled_bridge("short_span"))
    atsp, _ = noon_bean_transform(sub)
    return {
        "raycast (360 rays x 11 faces)": ("raycast", ray_args),
        "hough_vote (180 bins)": ("hough_vote", hough_args),
        f"held_karp_atsp ({atsp.shape[0]} nodes)": ("held_karp_atsp", (atsp,)),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    impls = kernels.backends()
    print(f"active backend: {kernels.BACKEND}; available: {', '.join(impls)}")
    print(f"{'kernel':38} " + " ".join(f"{name:>12}" for name in impls) + "   speedup")
    for label, (fn, fargs) in cases().items():
        times = {}
        for name, mod in impls.items():
            f = getattr(mod, fn)
            n = 1 if fn == "held_karp_atsp" else 20
            times[name] = min(timeit.repeat(lambda: f(*fargs), number=n, repeat=args.repeat)) / n
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{label:38} " + " ".join(f"{times[k] * 1e3:10.3f}ms" for k in impls) + f"   {speed:6.1f}x")


if __name__ == "__main__":
    main()
