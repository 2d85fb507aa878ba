"""Hypotheses built from labeled grids.

Two constructors turn a labeled grid into a definable approximant:

* :func:`auxiliary_union` -- the union of half-open auxiliary-grid cells whose
  centre grid point is labeled 1;
* :func:`convex_hull_hypothesis` -- the convex hull of the 1-labeled points.

Both reproduce the labeling exactly on the grid (see :func:`realizability_check`).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DegenerateGridError, GeometryError
from .predicates import monotone_chain, orient_many


@dataclass(frozen=True, eq=False)
class Grid:
    """The point set ``{(a[i], b[j])}``; coordinates may repeat."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float).ravel()
        b = np.asarray(self.b, dtype=float).ravel()
        if a.size == 0 or a.size != b.size:
            raise ValueError(f"grid sequences must be nonempty and of equal length, got {a.size} and {b.size}")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("grid coordinates must be finite")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def m(self) -> int:
        return self.a.size

    def points(self):
        """Grid coordinates as two ``m x m`` arrays, indexed ``[i, j] -> (a[i], b[j])``."""
        return np.meshgrid(self.a, self.b, indexing="ij")

    def mask(self, s) -> np.ndarray:
        """Membership of every grid point in ``s`` (evaluated once per distinct point)."""
        ca, ia = np.unique(self.a, return_inverse=True)
        cb, ib = np.unique(self.b, return_inverse=True)
        x, y = np.meshgrid(ca, cb, indexing="ij")
        distinct = np.asarray(s.contains_many(x, y), dtype=bool)
        return distinct[np.ix_(ia.ravel(), ib.ravel())]


@dataclass(frozen=True, eq=False)
class Labeling:
    grid: Grid
    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels)
        m = self.grid.m
        if labels.shape != (m, m):
            raise ValueError(f"labels must have shape ({m}, {m}), got {labels.shape}")
        if not np.all((labels == 0) | (labels == 1)):
            raise ValueError("labels must be 0 or 1")
        labels = labels.astype(np.uint8)
        # Repeated coordinates denote the same point and must agree.
        _, first_a, inv_a = np.unique(self.grid.a, return_index=True, return_inverse=True)
        _, first_b, inv_b = np.unique(self.grid.b, return_index=True, return_inverse=True)
        canon = labels[np.ix_(first_a, first_b)][np.ix_(inv_a.ravel(), inv_b.ravel())]
        if not np.array_equal(canon, labels):
            raise ValueError("inconsistent labeling: a repeated grid point carries two labels")
        object.__setattr__(self, "labels", labels)

    def distinct(self):
        """``(c, d, L)``: sorted distinct coordinates and the labels on them."""
        c, first_a = np.unique(self.grid.a, return_index=True)
        d, first_b = np.unique(self.grid.b, return_index=True)
        return c, d, self.labels[np.ix_(first_a, first_b)].astype(bool)

    def to_json(self) -> dict:
        return {"a": self.grid.a.tolist(), "b": self.grid.b.tolist(), "labels": self.labels.tolist()}

    @classmethod
    def from_json(cls, obj) -> "Labeling":
        return cls(Grid(obj["a"], obj["b"]), np.array(obj["labels"]))

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def label_grid(c, g: Grid) -> Labeling:
    """The labeling of ``g`` induced by membership in ``c``."""
    return Labeling(g, g.mask(c).astype(np.uint8))


def labeling_alternations(lab: Labeling) -> int:
    """Largest number of label changes along a row or column of distinct points.

    Each row and column is padded with a 0 on both ends, i.e. it is read as
    the trace of a set that is empty far away.  That is the count an
    auxiliary union (always bounded) exhibits along the corresponding line.
    """
    _, _, L = lab.distinct()
    padded = np.pad(L.astype(np.int8), 1)
    along_x = np.count_nonzero(np.diff(padded, axis=0), axis=0).max()
    along_y = np.count_nonzero(np.diff(padded, axis=1), axis=1).max()
    return int(max(along_x, along_y))


@dataclass(frozen=True, eq=False)
class AuxiliarySequence:
    u: np.ndarray
    c: np.ndarray

    @property
    def r(self) -> int:
        return self.c.size


def auxiliary_sequence(a) -> AuxiliarySequence:
    """Offset sequence interleaving the sorted distinct values of ``a``.

    ``u[0] = c[0] - 1``, ``u[r] = c[r-1] + 1`` and ``u[i]`` is the midpoint of
    ``c[i-1]`` and ``c[i]`` otherwise.
    """
    c = np.unique(np.asarray(a, dtype=float))
    if c.size == 0:
        raise ValueError("auxiliary_sequence needs a nonempty sequence")
    u = np.empty(c.size + 1)
    u[0] = c[0] - 1.0
    u[-1] = c[-1] + 1.0
    u[1:-1] = (c[:-1] + c[1:]) / 2.0
    if not (np.all(u[:-1] < c) and np.all(c < u[1:])):
        bad = int(np.flatnonzero(~((u[:-1] < c) & (c < u[1:])))[0])
        raise DegenerateGridError(
            f"cannot interleave coordinate {c[bad]!r}: neighbouring values are within one representable step"
        )
    return AuxiliarySequence(u, c)


class EmptyHypothesis:
    """The empty set (also a rectangle union with no rectangles)."""

    rects = ()

    def contains_many(self, x, y):
        return np.zeros(np.shape(x), dtype=bool)

    def __repr__(self):
        return "EmptyHypothesis()"

    def __eq__(self, other):
        return isinstance(other, EmptyHypothesis)

    def __hash__(self):
        return 0


EMPTY = EmptyHypothesis()


class AuxiliaryUnion:
    """Union of the half-open auxiliary cells ``[u_i, u_{i+1}) x [v_j, v_{j+1})`` with ``mask[i, j]``."""

    def __init__(self, u, v, mask):
        self.u = np.asarray(u, dtype=float)
        self.v = np.asarray(v, dtype=float)
        self.mask = np.asarray(mask, dtype=bool)
        if self.mask.shape != (self.u.size - 1, self.v.size - 1):
            raise GeometryError("cell mask does not match the auxiliary sequences")

    def contains_many(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        i = np.searchsorted(self.u, x, side="right") - 1
        j = np.searchsorted(self.v, y, side="right") - 1
        ok = (i >= 0) & (i < self.mask.shape[0]) & (j >= 0) & (j < self.mask.shape[1])
        out = np.zeros(x.shape, dtype=bool)
        out[ok] = self.mask[i[ok], j[ok]]
        return out

    @cached_property
    def rects(self):
        return tuple(
            (float(self.u[i]), float(self.u[i + 1]), float(self.v[j]), float(self.v[j + 1]))
            for i, j in zip(*np.nonzero(self.mask))
        )

    def __eq__(self, other):
        return (
            isinstance(other, AuxiliaryUnion)
            and np.array_equal(self.u, other.u)
            and np.array_equal(self.v, other.v)
            and np.array_equal(self.mask, other.mask)
        )

    __hash__ = None

    def __repr__(self):
        return f"AuxiliaryUnion(cells={int(self.mask.sum())}, grid={self.mask.shape})"


class ConvexHull:
    """Closed convex hull of finitely many points (possibly a point or a segment)."""

    def __init__(self, vertices):
        self.vertices = tuple((float(x), float(y)) for x, y in vertices)
        if not self.vertices:
            raise GeometryError("ConvexHull needs at least one vertex; use EMPTY")

    @classmethod
    def of_points(cls, points):
        return cls(monotone_chain(points))

    def contains_many(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        vs = self.vertices
        xs, ys = zip(*vs)
        inside = (x >= min(xs)) & (x <= max(xs)) & (y >= min(ys)) & (y <= max(ys))
        if len(vs) == 1:
            return inside
        idx = np.flatnonzero(inside.ravel())
        if idx.size == 0:
            return inside
        px, py = x.ravel()[idx], y.ravel()[idx]
        if len(vs) == 2:
            keep = orient_many(vs[0], vs[1], px, py) == 0
        else:
            keep = np.ones(idx.size, dtype=bool)
            for k in range(len(vs)):
                keep &= orient_many(vs[k], vs[(k + 1) % len(vs)], px, py) >= 0
        flat = inside.reshape(-1)
        flat[idx] = keep
        return inside

    def __eq__(self, other):
        return isinstance(other, ConvexHull) and self.vertices == other.vertices

    __hash__ = None

    def __repr__(self):
        return f"ConvexHull({list(self.vertices)})"


def auxiliary_union(lab: Labeling):
    """Half-open auxiliary cells around the 1-labeled grid points (``EMPTY`` if none)."""
    su = auxiliary_sequence(lab.grid.a)
    sv = auxiliary_sequence(lab.grid.b)
    _, _, L = lab.distinct()
    if not L.any():
        return EMPTY
    return AuxiliaryUnion(su.u, sv.u, L)


def convex_hull_hypothesis(lab: Labeling):
    """Convex hull of the 1-labeled grid points (``EMPTY`` if none)."""
    c, d, L = lab.distinct()
    cols = np.flatnonzero(L.any(axis=0))
    if cols.size == 0:
        return EMPTY
    # Only the extreme points of each row can be hull vertices.
    sub = L[:, cols]
    first = np.argmax(sub, axis=0)
    last = L.shape[0] - 1 - np.argmax(sub[::-1], axis=0)
    pts = [(c[i], d[j]) for i, j in zip(first, cols)] + [(c[i], d[j]) for i, j in zip(last, cols)]
    return ConvexHull.of_points(pts)


def realizability_check(c, g: Grid, h) -> int:
    """Number of grid pairs ``(i, j)`` on which ``h`` and ``c`` disagree."""
    x, y = g.points()
    return int(np.count_nonzero(h.contains_many(x, y) != g.mask(c)))


def random_alternation_labels(shape, D, rng) -> np.ndarray:
    """Random 0/1 matrix with at most ``D`` zero-padded changes per row and column.

    Built as a union of ``D // 2`` random index rectangles; each contributes
    one run per line, so every line sees at most ``2 * (D // 2)`` changes.
    """
    r0, r1 = shape
    out = np.zeros(shape, dtype=np.uint8)
    for _ in range(D // 2):
        i0, i1 = sorted(rng.integers(0, r0 + 1, size=2))
        j0, j1 = sorted(rng.integers(0, r1 + 1, size=2))
        out[i0:i1, j0:j1] = 1
    return out


def summary(h) -> str:
    if isinstance(h, ConvexHull):
        return f"hull({len(h.vertices)})"
    if isinstance(h, AuxiliaryUnion):
        return f"cells({int(h.mask.sum())})"
    if isinstance(h, EmptyHypothesis):
        return "empty"
    return type(h).__name__
