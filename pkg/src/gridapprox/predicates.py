"""Exact orientation predicates and the monotone-chain convex hull.

Orientation signs are computed in floating point and certified with a
static error bound; anything the bound cannot certify is recomputed with
exact rational arithmetic (every binary64 value is a dyadic rational).
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

_EPS = 2.0 ** -53
# Static bound for the 2x2 orientation determinant (Shewchuk's ccwerrboundA).
_ORIENT_BOUND = (3.0 + 16.0 * _EPS) * _EPS


def _orient_exact(ax, ay, bx, by, cx, cy) -> int:
    ax, ay, bx, by, cx, cy = (Fraction(v) for v in (ax, ay, bx, by, cx, cy))
    det = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    return (det > 0) - (det < 0)


def orient(a, b, c) -> int:
    """Sign of the turn a -> b -> c: +1 left (counterclockwise), -1 right, 0 collinear."""
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    cx, cy = float(c[0]), float(c[1])
    left = (bx - ax) * (cy - ay)
    right = (by - ay) * (cx - ax)
    det = left - right
    bound = _ORIENT_BOUND * (abs(left) + abs(right))
    if det > bound:
        return 1
    if -det > bound:
        return -1
    return _orient_exact(ax, ay, bx, by, cx, cy)


def orient_many(a, b, px, py) -> np.ndarray:
    """Vectorised :func:`orient` of the fixed edge ``a -> b`` against many points."""
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    px = np.asarray(px, dtype=float)
    py = np.asarray(py, dtype=float)
    left = (bx - ax) * (py - ay)
    right = (by - ay) * (px - ax)
    det = left - right
    bound = _ORIENT_BOUND * (np.abs(left) + np.abs(right))
    out = np.where(det > bound, 1, np.where(-det > bound, -1, 0)).astype(np.int8)
    unsure = np.flatnonzero((np.abs(det) <= bound).ravel())
    if unsure.size:
        flat = out.reshape(-1)
        fx, fy = px.reshape(-1), py.reshape(-1)
        for k in unsure:
            flat[k] = _orient_exact(ax, ay, bx, by, fx[k], fy[k])
    return out


def monotone_chain(points) -> list[tuple[float, float]]:
    """Convex hull vertices in counterclockwise order, starting at the lowest-x point.

    Collinear boundary points are dropped.  One or two distinct input points
    are returned as is (a point or a segment).
    """
    pts = sorted({(float(x), float(y)) for x, y in points})
    if len(pts) <= 2:
        return pts
    lower: list = []
    for p in pts:
        while len(lower) >= 2 and orient(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and orient(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    return hull
