"""Probability measures on the real line.

Only finite mixtures of point masses and uniform intervals are supported.
That is enough to cover both continuous and purely discrete (finite-grid)
settings while keeping every interval mass exactly computable, which the
rectangle-overlay loss computation relies on.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence, Union

import numpy as np

from .errors import ConfigError, MeasureError

WEIGHT_TOL = 1e-12
SEED_MASK = (1 << 64) - 1


def _check_weights(weights, what):
    for w in weights:
        if not (w >= 0.0) or math.isinf(w):
            raise MeasureError(f"{what}: weights must be finite and nonnegative, got {w!r}")
    total = math.fsum(weights)
    if abs(total - 1.0) > WEIGHT_TOL:
        raise MeasureError(f"{what}: weights sum to {total!r}, expected 1")


@dataclass(frozen=True)
class DiscreteAtoms:
    """Finitely many point masses, given as ``(point, weight)`` pairs."""

    atoms: tuple

    def __init__(self, atoms):
        atoms = tuple((float(p), float(w)) for p, w in atoms)
        if not atoms:
            raise MeasureError("DiscreteAtoms needs at least one atom")
        points = [p for p, _ in atoms]
        if any(not math.isfinite(p) for p in points):
            raise MeasureError("atom locations must be finite")
        if len(set(points)) != len(points):
            raise MeasureError("atom locations must be pairwise distinct")
        _check_weights([w for _, w in atoms], "DiscreteAtoms")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def from_multiset(cls, values):
        """Empirical measure of a finite multiset (weight = multiplicity / n)."""
        counts = Counter(float(v) for v in values)
        n = sum(counts.values())
        if n == 0:
            raise MeasureError("empty multiset")
        return cls(sorted((p, c / n) for p, c in counts.items()))


@dataclass(frozen=True)
class UniformInterval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise MeasureError("uniform interval endpoints must be finite")
        if not self.lo < self.hi:
            raise MeasureError(f"uniform interval needs lo < hi, got [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class Mixture:
    """Finite convex combination of measures, as ``(weight, measure)`` pairs."""

    components: tuple

    def __init__(self, components):
        components = tuple((float(w), mu) for w, mu in components)
        if not components:
            raise MeasureError("Mixture needs at least one component")
        for _, mu in components:
            if not isinstance(mu, (DiscreteAtoms, UniformInterval, Mixture)):
                raise MeasureError(f"not a measure: {mu!r}")
        _check_weights([w for w, _ in components], "Mixture")
        object.__setattr__(self, "components", components)


Measure1D = Union[DiscreteAtoms, UniformInterval, Mixture]


def _leaves(mu, scale=1.0):
    """Flatten to ``(weight, lo, hi)`` triples; atoms have ``lo == hi``."""
    if isinstance(mu, DiscreteAtoms):
        for p, w in mu.atoms:
            yield scale * w, p, p
    elif isinstance(mu, UniformInterval):
        yield scale, mu.lo, mu.hi
    elif isinstance(mu, Mixture):
        for w, sub in mu.components:
            yield from _leaves(sub, scale * w)
    else:
        raise MeasureError(f"not a measure: {mu!r}")


@dataclass(frozen=True)
class _SamplingTable:
    cumw: np.ndarray
    lo: np.ndarray
    width: np.ndarray


_TABLES: dict = {}


def _table(mu) -> _SamplingTable:
    tab = _TABLES.get(mu)
    if tab is None:
        leaves = [leaf for leaf in _leaves(mu) if leaf[0] > 0.0]
        w = np.array([leaf[0] for leaf in leaves])
        lo = np.array([leaf[1] for leaf in leaves])
        hi = np.array([leaf[2] for leaf in leaves])
        tab = _SamplingTable(np.cumsum(w) / w.sum(), lo, hi - lo)
        _TABLES[mu] = tab
    return tab


def is_atomic(mu) -> bool:
    """True when the measure has no continuous part."""
    return all(lo == hi for w, lo, hi in _leaves(mu) if w > 0.0)


def atoms_of(mu) -> tuple[np.ndarray, np.ndarray]:
    """Atom locations and masses of a purely atomic measure (merged, sorted)."""
    if not is_atomic(mu):
        raise MeasureError("measure has a continuous part")
    acc: dict = {}
    for w, lo, _ in _leaves(mu):
        if w > 0.0:
            acc[lo] = acc.get(lo, 0.0) + w
    pts = sorted(acc)
    return np.array(pts), np.array([acc[p] for p in pts])


@dataclass(frozen=True)
class Sample:
    values: np.ndarray = field(compare=False)
    seed: int
    source: str

    def __len__(self):
        return len(self.values)

    def __eq__(self, other):
        return (
            isinstance(other, Sample)
            and self.seed == other.seed
            and self.source == other.source
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


def sample(mu: Measure1D, m: int, seed: int) -> Sample:
    """Draw ``m`` i.i.d. points from ``mu``.

    A component is chosen by scanning cumulative weights; inside a uniform
    component the point is obtained from its (linear) inverse CDF.  The
    output is a pure function of ``(mu, m, seed)``.
    """
    if m < 1:
        raise ValueError(f"sample size must be >= 1, got {m}")
    seed = int(seed) & SEED_MASK
    rng = np.random.default_rng(seed)
    tab = _table(mu)
    u = rng.random(m)
    v = rng.random(m)
    k = np.minimum(np.searchsorted(tab.cumw, u, side="right"), len(tab.cumw) - 1)
    values = tab.lo[k] + v * tab.width[k]
    return Sample(values, seed, repr(mu))


def interval_mass(mu: Measure1D, lo: float, hi: float,
                  lo_closed: bool = True, hi_closed: bool = False) -> float:
    """Exact mass of the interval between ``lo`` and ``hi``.

    The closedness flags only matter for atoms; ``lo``/``hi`` may be infinite.
    """
    if lo > hi:
        raise ValueError(f"interval_mass needs lo <= hi, got ({lo}, {hi})")
    total = []
    for w, a, b in _leaves(mu):
        if w == 0.0:
            continue
        if a == b:
            inside_lo = a > lo or (lo_closed and a == lo)
            inside_hi = a < hi or (hi_closed and a == hi)
            if inside_lo and inside_hi:
                total.append(w)
        else:
            overlap = min(hi, b) - max(lo, a)
            if overlap > 0.0:
                total.append(w * overlap / (b - a))
    return min(1.0, math.fsum(total))


def cdf(mu: Measure1D, x: float) -> float:
    return interval_mass(mu, -math.inf, x, True, True)


def cdf_left(mu: Measure1D, x: float) -> float:
    """Left limit of the CDF at ``x``."""
    return interval_mass(mu, -math.inf, x, True, False)


def mean(mu: Measure1D) -> float:
    return math.fsum(w * (a + b) / 2.0 for w, a, b in _leaves(mu))


# -- JSON --------------------------------------------------------------------

def measure_from_json(obj, path=None, field="measure") -> Measure1D:
    """Parse ``{"atom": x}``, ``{"atoms": [[x, w], ...]}``, ``{"uniform": [lo, hi]}``,
    ``{"multiset": [x, ...]}`` or ``{"mixture": [{"w": .5, <measure>}, ...]}``."""
    if not isinstance(obj, dict):
        raise ConfigError("measure must be a JSON object", path, field)
    try:
        if "atom" in obj:
            return DiscreteAtoms([(float(obj["atom"]), 1.0)])
        if "atoms" in obj:
            return DiscreteAtoms([(float(p), float(w)) for p, w in obj["atoms"]])
        if "uniform" in obj:
            lo, hi = obj["uniform"]
            return UniformInterval(float(lo), float(hi))
        if "multiset" in obj:
            return DiscreteAtoms.from_multiset(obj["multiset"])
        if "mixture" in obj:
            comps = []
            for k, comp in enumerate(obj["mixture"]):
                if not isinstance(comp, dict) or "w" not in comp:
                    raise ConfigError("mixture component needs a weight 'w'", path, f"{field}.mixture[{k}]")
                rest = {key: val for key, val in comp.items() if key != "w"}
                comps.append((float(comp["w"]), measure_from_json(rest, path, f"{field}.mixture[{k}]")))
            return Mixture(comps)
    except ConfigError:
        raise
    except (MeasureError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc), path, field) from exc
    raise ConfigError(f"unknown measure kind {sorted(obj)}", path, field)


def measure_to_json(mu: Measure1D) -> dict:
    if isinstance(mu, DiscreteAtoms):
        return {"atoms": [[p, w] for p, w in mu.atoms]}
    if isinstance(mu, UniformInterval):
        return {"uniform": [mu.lo, mu.hi]}
    return {"mixture": [{"w": w, **measure_to_json(sub)} for w, sub in mu.components]}
