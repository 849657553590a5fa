"""Plain SVG renderings: mission side view and scan point clouds."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

BRIDGE = "#e08a1e"
TRACK = "#1f5fd1"
SWITCH = "#1a9e3a"
TRANSFER = "#8a8a8a"


class _Frame:
    """Maps world (a, b) to pixel coordinates with b pointing up."""

    def __init__(self, a_lo, a_hi, b_lo, b_hi, width=1000.0, margin=20.0):
        span_a = max(a_hi - a_lo, 1e-6)
        span_b = max(b_hi - b_lo, 1e-6)
        self.k = (width - 2 * margin) / span_a
        self.a_lo, self.b_hi, self.margin = a_lo, b_hi, margin
        self.width = width
        self.height = span_b * self.k + 2 * margin

    def __call__(self, a, b):
        return (self.margin + (a - self.a_lo) * self.k, self.margin + (self.b_hi - b) * self.k)


def _doc(frame: _Frame, body: list[str]) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{frame.width:.0f}" '
        f'height="{frame.height:.0f}" viewBox="0 0 {frame.width:.1f} {frame.height:.1f}">'
    )
    return "\n".join([head, '<rect width="100%" height="100%" fill="white"/>', *body, "</svg>"]) + "\n"


def _circle(frame, a, b, r, color, cls, title=""):
    x, y = frame(a, b)
    t = f"<title>{escape(title)}</title>" if title else ""
    return f'<circle class="{cls}" cx="{x:.2f}" cy="{y:.2f}" r="{r}" fill="{color}">{t}</circle>'


def trajectory_svg(log) -> str:
    """Side view (x horizontal, z up) of the bridge and the flown path."""
    rects = []
    if log.model is not None:
        for s in log.model.in_meters().surfaces:
            v = np.asarray(s.vertices, dtype=float)
            rects.append((s.id, v[:, 0].min(), v[:, 0].max(), v[:, 2].min(), v[:, 2].max()))
    xs = [s.state.position[0] for s in log.samples]
    zs = [s.state.position[2] for s in log.samples]
    a_vals = xs + [r[1] for r in rects] + [r[2] for r in rects]
    b_vals = zs + [r[3] for r in rects] + [r[4] for r in rects]
    if not a_vals:
        a_vals, b_vals = [0.0, 1.0], [0.0, 1.0]
    pad = 2.0
    f = _Frame(min(a_vals) - pad, max(a_vals) + pad, min(b_vals) - pad, max(b_vals) + pad)
    body = []
    for sid, x0, x1, z0, z1 in rects:
        (px, py), (qx, qy) = f(x0, z1), f(x1, z0)
        body.append(
            f'<rect class="bridge" x="{px:.2f}" y="{py:.2f}" width="{qx - px:.2f}" height="{qy - py:.2f}" '
            f'fill="none" stroke="{BRIDGE}" stroke-width="2"><title>{escape(sid)}</title></rect>'
        )
    if xs:
        pts = " ".join("{:.2f},{:.2f}".format(*f(x, z)) for x, z in zip(xs, zs))
        body.append(f'<polyline class="trajectory" points="{pts}" fill="none" stroke="{TRACK}" stroke-width="1.5"/>')
    for p in log.phases:
        if p.kind == "switch":
            body.append(_circle(f, p.pose.x, p.pose.z, 5, SWITCH, "switch", f"t={p.t:.1f}s {p.routine}"))
        elif p.kind == "transfer":
            body.append(_circle(f, p.pose.x, p.pose.z, 4, TRANSFER, "transfer", f"t={p.t:.1f}s {p.routine}"))
    if xs:
        body.append(_circle(f, xs[0], zs[0], 6, "black", "start", "start"))
        body.append(_circle(f, xs[-1], zs[-1], 6, "red", "end", "end"))
    return _doc(f, body)


def scan_svg(points: np.ndarray, lines=(), highlight=None) -> str:
    """Scan-plane point cloud with extracted lines drawn over it."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    ends = [p for ln in lines for p in ln.endpoints]
    allp = np.vstack([pts, np.asarray(ends).reshape(-1, 2), [[0.0, 0.0]]])
    pad = 1.0
    f = _Frame(allp[:, 0].min() - pad, allp[:, 0].max() + pad, allp[:, 1].min() - pad, allp[:, 1].max() + pad,
               width=600.0)
    body = [_circle(f, 0.0, 0.0, 4, "black", "sensor")]
    for x, y in pts:
        body.append(_circle(f, x, y, 1.5, "#444444", "point"))
    for ln in lines:
        (ax, ay), (bx, by) = f(*ln.endpoints[0]), f(*ln.endpoints[1])
        color = SWITCH if ln is highlight else "#d62728"
        body.append(
            f'<line class="line" x1="{ax:.2f}" y1="{ay:.2f}" x2="{bx:.2f}" y2="{by:.2f}" stroke="{color}" '
            f'stroke-width="2"><title>theta={ln.theta:.1f} rho={ln.rho:.2f} extent={ln.extent:.2f} '
            f'n={ln.inlier_count}</title></line>'
        )
    if not math.isfinite(f.height):
        raise ValueError("degenerate scan extent")
    return _doc(f, body)
