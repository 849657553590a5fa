"""Synthetic point sets with known line parameters."""

import math

import numpy as np


def line_points(theta_deg, rho, t0, t1, n, sigma=0.0, rng=None):
    """``n`` points from parameter t0 to t1 along the (theta, rho) line."""
    t = math.radians(theta_deg)
    d = np.array([math.cos(t), math.sin(t)])
    nrm = np.array([-math.sin(t), math.cos(t)])
    s = np.linspace(t0, t1, n)
    pts = rho * nrm + s[:, None] * d
    if sigma:
        pts = pts + (rng or np.random.default_rng(0)).normal(0.0, sigma, pts.shape)
    return pts


def segment(p, q, n):
    p, q = np.asarray(p, float), np.asarray(q, float)
    return p + np.linspace(0, 1, n)[:, None] * (q - p)


def line_error(theta_a, rho_a, theta_b, rho_b):
    """Angle and offset difference between two (theta, rho) lines.

    Inclinations on opposite sides of the 0/180 seam describe the same line
    with rho negated.
    """
    d = (theta_a - theta_b) % 180.0
    if abs(theta_a - theta_b) > 90.0:
        rho_b = -rho_b
    return min(d, 180.0 - d), abs(rho_a - rho_b)


def three_line_scene():
    """Vertical cut with a 4 m vertical face, a 10-degree deck line and a 1 m stub."""
    face = segment((4.5, -1.5), (4.5, 2.5), 41)
    deck = segment((5.5, 3.2), (12.0, 3.2 + 6.5 * math.tan(math.radians(10))), 40)
    stub = segment((7.0, -4.0), (7.0, -3.0), 11)
    return np.vstack([face, deck, stub])
