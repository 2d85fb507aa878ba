"""Planar target sets, alternation counting and Hausdorff distances.

Every set-like object in the package exposes ``contains_many(x, y)``, which
takes two equally shaped float arrays and returns a boolean array.  Objects
that are finite unions of half-open rectangles additionally expose
``rects``, a tuple of ``(x_lo, x_hi, y_lo, y_hi)`` read as
``[x_lo, x_hi) x [y_lo, y_hi)``; the loss engine uses it for exact overlays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import ConfigError, GeometryError
from .predicates import monotone_chain, orient_many

HORIZONTAL = "horizontal"
VERTICAL = "vertical"
AXES = (HORIZONTAL, VERTICAL)

_EPS = 2.0 ** -53


def _as_xy(x, y):
    return np.asarray(x, dtype=float), np.asarray(y, dtype=float)


@dataclass(frozen=True)
class Disk:
    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        if not self.radius > 0:
            raise GeometryError(f"disk radius must be positive, got {self.radius}")

    def contains_many(self, x, y):
        x, y = _as_xy(x, y)
        dx = x - self.center[0]
        dy = y - self.center[1]
        return dx * dx + dy * dy <= self.radius * self.radius

    def bbox(self):
        (cx, cy), r = self.center, self.radius
        return cx - r, cx + r, cy - r, cy + r


@dataclass(frozen=True)
class ConvexPolygon:
    """Closed convex polygon; vertices strictly convex and counterclockwise."""

    vertices: tuple

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        if len(verts) < 3:
            raise GeometryError("a polygon needs at least 3 vertices")
        if len(set(verts)) != len(verts):
            raise GeometryError("polygon has duplicate vertices")
        hull = monotone_chain(verts)
        if len(hull) != len(verts):
            raise GeometryError("polygon vertices are not in strictly convex position")
        k = verts.index(hull[0])
        if verts[k:] + verts[:k] != tuple(hull):
            raise GeometryError("polygon vertices must be listed counterclockwise")
        object.__setattr__(self, "vertices", verts)

    def contains_many(self, x, y):
        x, y = _as_xy(x, y)
        inside = np.ones(x.shape, dtype=bool)
        n = len(self.vertices)
        for k in range(n):
            inside &= orient_many(self.vertices[k], self.vertices[(k + 1) % n], x, y) >= 0
        return inside

    def bbox(self):
        xs, ys = zip(*self.vertices)
        return min(xs), max(xs), min(ys), max(ys)


@dataclass(frozen=True)
class HalfPlaneIntersection:
    """Points with ``nx*x + ny*y <= offset`` for every ``(nx, ny, offset)``.

    With no half-planes this is the whole plane.
    """

    halfplanes: tuple = ()

    def __post_init__(self):
        hp = tuple((float(a), float(b), float(c)) for a, b, c in self.halfplanes)
        for a, b, _ in hp:
            if a == 0.0 and b == 0.0:
                raise GeometryError("half-plane normal must be nonzero")
        object.__setattr__(self, "halfplanes", hp)

    def contains_many(self, x, y):
        x, y = _as_xy(x, y)
        inside = np.ones(x.shape, dtype=bool)
        for a, b, c in self.halfplanes:
            val = a * x + b * y - c
            bound = 8 * _EPS * (np.abs(a * x) + np.abs(b * y) + abs(c))
            ok = val < -bound
            unsure = np.flatnonzero((np.abs(val) <= bound).ravel())
            if unsure.size:
                flat = ok.reshape(-1)
                fx, fy = x.reshape(-1), y.reshape(-1)
                fa, fb, fc = Fraction(a), Fraction(b), Fraction(c)
                for k in unsure:
                    flat[k] = fa * Fraction(fx[k]) + fb * Fraction(fy[k]) <= fc
            inside &= ok
        return inside


def _rect_tuple(r):
    x0, x1, y0, y1 = (float(v) for v in r)
    if not (x0 < x1 and y0 < y1):
        raise GeometryError(f"degenerate rectangle {r!r}: need x_lo < x_hi and y_lo < y_hi")
    return x0, x1, y0, y1


def rects_contain(rects, x, y):
    x, y = _as_xy(x, y)
    inside = np.zeros(x.shape, dtype=bool)
    for x0, x1, y0, y1 in rects:
        inside |= (x0 <= x) & (x < x1) & (y0 <= y) & (y < y1)
    return inside


@dataclass(frozen=True)
class RectUnion:
    """Union of pairwise disjoint half-open rectangles ``[x0,x1) x [y0,y1)``."""

    rects: tuple = ()

    def __post_init__(self):
        rects = tuple(_rect_tuple(r) for r in self.rects)
        if len(rects) > 1:
            arr = np.array(rects)
            ox = (arr[:, None, 0] < arr[None, :, 1]) & (arr[None, :, 0] < arr[:, None, 1])
            oy = (arr[:, None, 2] < arr[None, :, 3]) & (arr[None, :, 2] < arr[:, None, 3])
            both = ox & oy
            np.fill_diagonal(both, False)
            if both.any():
                i, j = np.argwhere(both)[0]
                raise GeometryError(f"rectangles {rects[i]} and {rects[j]} overlap")
        object.__setattr__(self, "rects", rects)

    def contains_many(self, x, y):
        return rects_contain(self.rects, x, y)

    def bbox(self):
        if not self.rects:
            return None
        arr = np.array(self.rects)
        return arr[:, 0].min(), arr[:, 1].max(), arr[:, 2].min(), arr[:, 3].max()


@dataclass(frozen=True)
class OracleSet:
    """Opaque membership oracle with a declared alternation bound.

    ``membership`` must be a pure function ``(x, y) -> bool``.
    """

    membership: Callable
    alternation_bound: int

    def contains_many(self, x, y):
        x, y = _as_xy(x, y)
        f = self.membership
        flat = [bool(f(float(a), float(b))) for a, b in zip(x.ravel(), y.ravel())]
        return np.array(flat, dtype=bool).reshape(x.shape)


def contains(s, p) -> int:
    """Membership indicator of the planar point ``p`` in ``s``."""
    return int(s.contains_many(np.array([float(p[0])]), np.array([float(p[1])]))[0])


def _line_points(axis, coordinate, probes):
    probes = np.asarray(probes, dtype=float)
    other = np.full(probes.shape, float(coordinate))
    if axis == HORIZONTAL:
        return probes, other
    if axis == VERTICAL:
        return other, probes
    raise ValueError(f"axis must be one of {AXES}, got {axis!r}")


def alternations_on_line(s, axis: str, coordinate: float, probes) -> int:
    """Membership changes between consecutive probes on an axis-parallel line.

    A horizontal line is ``y = coordinate`` probed at x-values, a vertical one
    is ``x = coordinate`` probed at y-values.  The result is a lower bound on
    the alternation count of ``s`` along the line.
    """
    probes = np.asarray(probes, dtype=float)
    if probes.ndim != 1 or probes.size < 2:
        raise ValueError("need at least two probes")
    if not np.all(np.diff(probes) > 0):
        raise ValueError("probes must be strictly increasing")
    inside = s.contains_many(*_line_points(axis, coordinate, probes))
    return int(np.count_nonzero(inside[1:] != inside[:-1]))


def breakpoint_probes(rects, axis: str) -> np.ndarray:
    """Probe positions that make :func:`alternations_on_line` exact for a rectangle union.

    Membership along the line is right-continuous and piecewise constant with
    jumps only at rectangle edges, so probing every edge coordinate plus one
    sentinel to the left of all of them sees every change.
    """
    cols = (0, 1) if axis == HORIZONTAL else (2, 3)
    edges = sorted({r[c] for r in rects for c in cols})
    if not edges:
        return np.array([-1.0, 1.0])
    return np.array([edges[0] - 1.0] + edges)


def exact_alternations(s, axis: str, coordinate: float) -> int:
    """Exact alternation count of a rectangle union along an axis-parallel line."""
    return alternations_on_line(s, axis, coordinate, breakpoint_probes(s.rects, axis))


def spot_check_alternations(s, rng, box, n_lines=50, n_probes=200) -> int:
    """Largest alternation count seen on random axis-parallel lines through ``box``.

    ``box`` is ``(x_lo, x_hi, y_lo, y_hi)``; probes extend one box-width past
    either side so the outside of bounded sets is seen.
    """
    x0, x1, y0, y1 = box
    worst = 0
    for _ in range(n_lines):
        if rng.random() < 0.5:
            axis, c, lo, hi = HORIZONTAL, rng.uniform(y0, y1), x0 - (x1 - x0), x1 + (x1 - x0)
        else:
            axis, c, lo, hi = VERTICAL, rng.uniform(x0, x1), y0 - (y1 - y0), y1 + (y1 - y0)
        probes = np.unique(rng.uniform(lo, hi, n_probes))
        worst = max(worst, alternations_on_line(s, axis, c, probes))
    return worst


# -- point clouds and Hausdorff distance -------------------------------------

@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2) if len(self.points) else np.empty((0, 2))
        if pts.shape[0] == 0:
            raise GeometryError("point cloud must be nonempty")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return self.points.shape[0]


def _cloud(a):
    return a if isinstance(a, PointCloud) else PointCloud(a)


def _pairwise(a, b):
    diff = a[:, None, :] - b[None, :, :]
    return np.hypot(diff[..., 0], diff[..., 1])


def point_set_distance(p, a) -> float:
    """Euclidean distance from point ``p`` to the nearest point of cloud ``a``."""
    pts = _cloud(a).points
    return float(np.min(np.hypot(pts[:, 0] - float(p[0]), pts[:, 1] - float(p[1]))))


def hausdorff(a, b) -> float:
    """Hausdorff distance between two finite point clouds, by all-pairs distances."""
    pa, pb = _cloud(a).points, _cloud(b).points
    d = _pairwise(pa, pb)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


# -- JSON --------------------------------------------------------------------

def target_from_json(obj, path=None, field="target"):
    """Parse ``{"disk": {"c": [x, y], "r": r}}``, ``{"polygon": [[x, y], ...]}``,
    ``{"rects": [[x0, x1, y0, y1], ...]}``, ``{"halfplanes": [[nx, ny, off], ...]}``,
    ``{"empty": {}}`` or ``{"full": {}}``."""
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ConfigError("target must be an object with exactly one key", path, field)
    (kind, val), = obj.items()
    try:
        if kind == "disk":
            return Disk(tuple(val["c"]), float(val["r"]))
        if kind == "polygon":
            return ConvexPolygon(tuple(tuple(p) for p in val))
        if kind == "rects":
            return RectUnion(tuple(tuple(r) for r in val))
        if kind == "halfplanes":
            return HalfPlaneIntersection(tuple(tuple(h) for h in val))
        if kind == "empty":
            return RectUnion(())
        if kind == "full":
            return HalfPlaneIntersection(())
    except (GeometryError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad {kind} target: {exc}", path, field) from exc
    raise ConfigError(f"unknown target kind {kind!r}", path, field)


def target_to_json(s) -> dict:
    if isinstance(s, Disk):
        return {"disk": {"c": list(s.center), "r": s.radius}}
    if isinstance(s, ConvexPolygon):
        return {"polygon": [list(v) for v in s.vertices]}
    if isinstance(s, RectUnion):
        return {"rects": [list(r) for r in s.rects]}
    if isinstance(s, HalfPlaneIntersection):
        return {"halfplanes": [list(h) for h in s.halfplanes]}
    raise TypeError(f"{type(s).__name__} has no JSON form")


def describe(s) -> str:
    if isinstance(s, Disk):
        return f"disk(c=({s.center[0]:g},{s.center[1]:g}),r={s.radius:g})"
    if isinstance(s, ConvexPolygon):
        return f"polygon({len(s.vertices)})"
    if isinstance(s, HalfPlaneIntersection):
        return f"halfplanes({len(s.halfplanes)})" if s.halfplanes else "full"
    if hasattr(s, "rects"):
        return f"rects({len(s.rects)})" if s.rects else "empty"
    return type(s).__name__
