"""Brute-force VC machinery and uniform-convergence sample bounds.

Set families over a finite universe are stored as integer bitmasks (bit ``i``
set when universe point ``i`` belongs to the set).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import SizeGuardError
from .sets import HORIZONTAL, VERTICAL

MAX_UNIVERSE = 25
MAX_SLICE = 20
MAX_SYMDIFF_SETS = 1 << 12
_CHUNK = 1 << 22


def _guard(n, cap, what):
    if n > cap:
        raise SizeGuardError(f"{what} has size {n}; exhaustive search is capped at {cap}")


@dataclass(frozen=True)
class FiniteFamily:
    universe: tuple
    sets: tuple

    def __post_init__(self):
        object.__setattr__(self, "universe", tuple(self.universe))
        sets = tuple(int(s) for s in self.sets)
        full = (1 << len(self.universe)) - 1
        for s in sets:
            if s < 0 or s & ~full:
                raise ValueError(f"bitmask {s:#x} has bits outside a universe of size {len(self.universe)}")
        object.__setattr__(self, "sets", sets)

    @classmethod
    def from_members(cls, universe, members: Sequence[Sequence[int]]) -> "FiniteFamily":
        """Build from lists of universe indices."""
        return cls(universe, [sum(1 << i for i in set(idx)) for idx in members])

    @classmethod
    def from_sets(cls, universe, setlikes) -> "FiniteFamily":
        """Traces of planar set-likes on a universe of planar points."""
        pts = np.asarray(universe, dtype=float).reshape(-1, 2)
        weights = 1 << np.arange(len(pts), dtype=object)
        masks = []
        for s in setlikes:
            inside = s.contains_many(pts[:, 0], pts[:, 1])
            masks.append(int(sum(weights[inside])) if inside.any() else 0)
        return cls([tuple(p) for p in pts.tolist()], masks)

    @property
    def n(self) -> int:
        return len(self.universe)

    def traces(self) -> set:
        return set(self.sets)


def _popcount(x: int) -> int:
    return bin(x).count("1")


def shatters(f: FiniteFamily, subset: int) -> bool:
    """True iff every pattern on ``subset`` is the trace of some set of ``f``."""
    k = _popcount(subset)
    _guard(k, MAX_UNIVERSE, "subset")
    if subset & ~((1 << f.n) - 1):
        raise ValueError("subset is not contained in the universe")
    return len({s & subset for s in f.sets}) == 1 << k


def _trace_counts(arr: np.ndarray, masks: np.ndarray, n: int) -> np.ndarray:
    """Number of distinct traces ``arr & mask`` for each mask."""
    out = np.empty(masks.size, dtype=np.int64)
    width = 1 << n if n <= 16 else 0
    step = max(1, _CHUNK // max(1, arr.size, width))
    for lo in range(0, masks.size, step):
        t = masks[lo:lo + step, None] & arr[None, :]
        if width:
            seen = np.zeros((t.shape[0], width), dtype=bool)
            seen[np.arange(t.shape[0])[:, None], t] = True
            out[lo:lo + step] = seen.sum(axis=1)
        else:
            t.sort(axis=1)
            out[lo:lo + step] = 1 + np.count_nonzero(np.diff(t, axis=1), axis=1)
    return out


def shattered_levels(f: FiniteFamily, stop_early=True):
    """Yield the list of shattered ``k``-subsets for ``k = 0, 1, ...``.

    Candidates of size ``k+1`` are only formed from shattered ``k``-subsets
    (every subset of a shattered set is shattered).
    """
    _guard(f.n, MAX_UNIVERSE, "universe")
    distinct = sorted(set(f.sets))
    if not distinct:
        return
    arr = np.array(distinct, dtype=np.int64)
    level = [0]
    yield level
    k = 0
    while level and (1 << (k + 1)) <= len(distinct):
        have = set(level)
        cands = []
        for s in level:
            top = s.bit_length()
            for e in range(top, f.n):
                c = s | (1 << e)
                if all((c & ~(1 << b)) in have for b in range(e) if c >> b & 1):
                    cands.append(c)
        if not cands:
            return
        masks = np.array(cands, dtype=np.int64)
        counts = _trace_counts(arr, masks, f.n)
        k += 1
        level = [c for c, cnt in zip(cands, counts) if cnt == 1 << k]
        if level:
            yield level
        elif stop_early:
            return


def vc_dimension(f: FiniteFamily) -> int:
    """Size of the largest shattered subset of the universe.

    Searches subsets by ascending size and stops at the first size with no
    shattered subset.  An empty family is reported as 0.
    """
    _guard(f.n, MAX_UNIVERSE, "universe")
    if len(set(f.sets)) == 1 << f.n:
        return f.n
    d = 0
    for k, _ in enumerate(shattered_levels(f)):
        d = k
    return d


def sauer_bound(n: int, d: int) -> int:
    return sum(math.comb(n, i) for i in range(d + 1))


def sauer_bound_check(f: FiniteFamily) -> bool:
    """Whether the number of traces on the universe is at most ``sum_{i<=d} C(n, i)``."""
    d = vc_dimension(f)
    return len(f.traces()) <= sauer_bound(f.n, d)


def symdiff_family(f: FiniteFamily) -> FiniteFamily:
    """All pairwise symmetric differences ``S ^ T`` (deduplicated)."""
    _guard(len(f.sets), MAX_SYMDIFF_SETS, "family")
    arr = np.array(sorted(set(f.sets)), dtype=np.int64)
    if arr.size == 0:
        return FiniteFamily(f.universe, ())
    x = np.unique(arr[:, None] ^ arr[None, :])
    return FiniteFamily(f.universe, [int(v) for v in x])


def svc_lower_bound(pool, witnesses, axis: str) -> int:
    """VC dimension of the pool's traces on one axis-parallel slice.

    ``witnesses = (w, z)``: along ``vertical`` the slice points are
    ``(w, z_i)``, along ``horizontal`` they are ``(z_i, w)``.  Since ``pool`` is
    finite this is a lower bound on the slicewise VC dimension of any class
    containing it.
    """
    w, z = witnesses
    z = [float(v) for v in z]
    _guard(len(z), MAX_SLICE, "slice")
    if axis == VERTICAL:
        pts = [(float(w), v) for v in z]
    elif axis == HORIZONTAL:
        pts = [(v, float(w)) for v in z]
    else:
        raise ValueError(f"axis must be {HORIZONTAL!r} or {VERTICAL!r}")
    return vc_dimension(FiniteFamily.from_sets(pts, pool))


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def entropy_constant(tol: float = 1e-12) -> float:
    """Largest ``c >= 1`` with ``h2(1/c) <= 1/2``, by bisection on ``[2, 16]``.

    ``h2(1/c)`` decreases in ``c`` there, so the answer is the unique root of
    ``h2(1/c) = 1/2``.
    """
    lo, hi = 2.0, 16.0
    while hi - lo > tol:
        mid = (lo + hi) / 2.0
        if binary_entropy(1.0 / mid) > 0.5:
            lo = mid
        else:
            hi = mid
    return lo


TWO_WAY = (6873.0, 8109.0)
ONE_WAY = (378.0, 446.0)


@dataclass(frozen=True)
class UCBoundParams:
    d: int
    eps: float
    delta: float
    K: float = TWO_WAY[0]
    K_prime: float = TWO_WAY[1]

    @classmethod
    def two_way(cls, d, eps, delta):
        return cls(d, eps, delta, *TWO_WAY)

    @classmethod
    def one_way(cls, d, eps, delta):
        return cls(d, eps, delta, *ONE_WAY)


def m_uc(params: UCBoundParams) -> int:
    """Sufficient grid side ``ceil(K d / (delta^2 eps^2) * ln(K' d / (delta^2 eps^2)))``.

    The log argument is clamped below at ``e``.  ``d = 0`` gives 1: a class of
    slicewise dimension 0 has at most one member.
    """
    d, eps, delta = params.d, params.eps, params.delta
    if d < 0:
        raise ValueError("d must be nonnegative")
    if not eps > 0:
        raise ValueError("eps must be positive")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if d == 0:
        return 1
    scale = d / (delta * delta * eps * eps)
    return math.ceil(params.K * scale * math.log(max(math.e, params.K_prime * scale)))


def family_to_json(f: FiniteFamily) -> dict:
    return {"universe": list(f.universe),
            "sets": [[i for i in range(f.n) if s >> i & 1] for s in f.sets]}


def family_from_json(obj) -> FiniteFamily:
    """``{"universe": [...], "sets": [[indices], ...]}`` or ``{"universe": [...], "masks": [ints]}``."""
    universe = obj["universe"]
    if "masks" in obj:
        return FiniteFamily(universe, obj["masks"])
    return FiniteFamily.from_members(universe, obj["sets"])
