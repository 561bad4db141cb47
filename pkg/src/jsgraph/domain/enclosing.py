"""Smallest enclosing disk (randomized incremental construction)."""

from __future__ import annotations

import math

import numpy as np


def _circle_two(a, b):
    c = 0.5 * (a + b)
    return c, float(np.hypot(*(a - c)))


def _circle_three(a, b, c):
    ox = (min(a[0], b[0], c[0]) + max(a[0], b[0], c[0])) / 2
    oy = (min(a[1], b[1], c[1]) + max(a[1], b[1], c[1])) / 2
    ax, ay = a[0] - ox, a[1] - oy
    bx, by = b[0] - ox, b[1] - oy
    cx, cy = c[0] - ox, c[1] - oy
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if d == 0.0:
        return None
    ux = ox + ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay) + (cx * cx + cy * cy) * (ay - by)) / d
    uy = oy + ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx) + (cx * cx + cy * cy) * (bx - ax)) / d
    center = np.array([ux, uy])
    r = max(float(np.hypot(*(center - p))) for p in (a, b, c))
    return center, r


def _inside(circle, p, rel=1e-12):
    c, r = circle
    return math.hypot(p[0] - c[0], p[1] - c[1]) <= r * (1 + rel) + 1e-14


def smallest_enclosing_disk(points, seed=0):
    """Center and radius of the smallest disk containing ``points``.

    Expected linear time; the shuffle uses a fixed seed so results are
    reproducible.
    """
    pts = np.asarray(points, dtype=float)
    if len(pts) == 0:
        raise ValueError("no points")
    order = np.random.default_rng(seed).permutation(len(pts))
    pts = pts[order]
    circle = (pts[0].copy(), 0.0)
    for i in range(1, len(pts)):
        if _inside(circle, pts[i]):
            continue
        circle = (pts[i].copy(), 0.0)
        for j in range(i):
            if _inside(circle, pts[j]):
                continue
            circle = _circle_two(pts[i], pts[j])
            for k in range(j):
                if _inside(circle, pts[k]):
                    continue
                cand = _circle_three(pts[i], pts[j], pts[k])
                if cand is not None:
                    circle = cand
    return circle[0], circle[1]
