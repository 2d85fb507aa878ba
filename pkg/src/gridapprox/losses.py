"""Empirical and total (product-measure) losses between planar sets.

The loss of a pair ``(H0, H1)`` is the mass of their symmetric difference,
either under the counting measure of a grid (empirical) or under a product
measure ``mu0 x mu1`` (total).  Total loss is exact for pairs of rectangle
unions (overlay on merged breakpoints) and for purely atomic measures
(enumeration of atom pairs); otherwise it is a Monte Carlo estimate.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from statistics import NormalDist

import numpy as np

from . import measures as M

Z99 = NormalDist().inv_cdf(0.995)
MC_BLOCK = 1 << 15
DEFAULT_MC_SAMPLES = 100_000

EXACT = "exact"
MONTE_CARLO = "monte_carlo"


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministic 64-bit child seed for the stream ``keys`` of ``seed``."""
    ss = np.random.SeedSequence([int(seed) & M.SEED_MASK, *[int(k) for k in keys]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def is_rect_like(s) -> bool:
    return hasattr(s, "rects")


@dataclass
class LossReport:
    empirical: Fraction
    total_estimate: float
    total_ci_halfwidth: float
    method: str
    n_samples: int = 0
    seed: int | None = None
    verdict: str = ""
    pair_id: str = ""

    def method_label(self) -> str:
        if self.method == MONTE_CARLO:
            return f"monte_carlo(n={self.n_samples},seed={self.seed})"
        return self.method


def empirical_loss(h0, h1, g) -> Fraction:
    """Fraction of the ``m*m`` grid pairs lying in exactly one of ``h0``, ``h1``."""
    k = int(np.count_nonzero(g.mask(h0) != g.mask(h1)))
    return Fraction(k, g.m * g.m)


def total_loss_exact(h0, h1, mu0, mu1) -> float:
    """Exact ``(mu0 x mu1)(h0 ^ h1)`` for two finite unions of half-open rectangles.

    Both unions are overlaid on the merged x- and y-breakpoints; every overlay
    cell is half-open too, so its coverage is read off its lower-left corner.
    """
    rects = list(h0.rects) + list(h1.rects)
    if not rects:
        return 0.0
    xs = np.array(sorted({v for r in rects for v in r[:2]}))
    ys = np.array(sorted({v for r in rects for v in r[2:]}))
    cx, cy = np.meshgrid(xs[:-1], ys[:-1], indexing="ij")
    diff = h0.contains_many(cx, cy) != h1.contains_many(cx, cy)
    if not diff.any():
        return 0.0
    wx = np.array([M.interval_mass(mu0, xs[k], xs[k + 1], True, False) for k in range(xs.size - 1)])
    wy = np.array([M.interval_mass(mu1, ys[k], ys[k + 1], True, False) for k in range(ys.size - 1)])
    return float(math.fsum((wx[:, None] * wy[None, :])[diff]))


def total_loss_atoms(h0, h1, mu0, mu1) -> float:
    """Exact total loss when both measures are purely atomic."""
    px, wx = M.atoms_of(mu0)
    py, wy = M.atoms_of(mu1)
    x, y = np.meshgrid(px, py, indexing="ij")
    diff = h0.contains_many(x, y) != h1.contains_many(x, y)
    return float(math.fsum((wx[:, None] * wy[None, :])[diff]))


def _mc_block(h0, h1, mu0, mu1, seed, block, size) -> int:
    x = M.sample(mu0, size, derive_seed(seed, 0, block)).values
    y = M.sample(mu1, size, derive_seed(seed, 1, block)).values
    return int(np.count_nonzero(h0.contains_many(x, y) != h1.contains_many(x, y)))


def total_loss_mc(h0, h1, mu0, mu1, n: int = DEFAULT_MC_SAMPLES, seed: int = 0,
                  workers: int = 1) -> tuple[float, float]:
    """Monte Carlo estimate of the total loss with a 99% normal-approximation half-width.

    Draws are made in fixed blocks whose seeds depend only on ``(seed, block)``,
    so the estimate does not depend on ``workers``.
    """
    if n < 100:
        raise ValueError(f"Monte Carlo needs n >= 100, got {n}")
    sizes = [min(MC_BLOCK, n - start) for start in range(0, n, MC_BLOCK)]
    jobs = [(h0, h1, mu0, mu1, seed, b, s) for b, s in enumerate(sizes)]
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = sum(pool.map(lambda job: _mc_block(*job), jobs))
    else:
        hits = sum(_mc_block(*job) for job in jobs)
    p = hits / n
    return p, Z99 * math.sqrt(p * (1.0 - p) / n)


def total_loss(h0, h1, mu0, mu1, n: int = DEFAULT_MC_SAMPLES, seed: int = 0):
    """Best available total loss: ``(estimate, ci_halfwidth, method)``."""
    if is_rect_like(h0) and is_rect_like(h1):
        return total_loss_exact(h0, h1, mu0, mu1), 0.0, EXACT
    if M.is_atomic(mu0) and M.is_atomic(mu1):
        return total_loss_atoms(h0, h1, mu0, mu1), 0.0, EXACT
    est, ci = total_loss_mc(h0, h1, mu0, mu1, n, seed)
    return est, ci, MONTE_CARLO


def total_losses(pairs, mu0, mu1, n: int = DEFAULT_MC_SAMPLES, seed: int = 0):
    """Total losses of several pairs measured one way: ``([(estimate, ci)], method)``.

    Exact if every pair admits an exact path, otherwise Monte Carlo on one
    common set of draws.  A shared measurement is itself a probability
    measure, so the results keep the pseudometric triangle inequality.
    """
    pairs = list(pairs)
    if all(is_rect_like(p) and is_rect_like(q) for p, q in pairs):
        return [(total_loss_exact(p, q, mu0, mu1), 0.0) for p, q in pairs], EXACT
    if M.is_atomic(mu0) and M.is_atomic(mu1):
        return [(total_loss_atoms(p, q, mu0, mu1), 0.0) for p, q in pairs], EXACT
    return [total_loss_mc(p, q, mu0, mu1, n, seed) for p, q in pairs], MONTE_CARLO


def loss_report(h0, h1, g, mu0, mu1, n=DEFAULT_MC_SAMPLES, seed=0) -> LossReport:
    est, ci, method = total_loss(h0, h1, mu0, mu1, n, seed)
    return LossReport(empirical_loss(h0, h1, g), est, ci, method,
                      n if method == MONTE_CARLO else 0, seed if method == MONTE_CARLO else None)


def verdict(empirical, total, ci, eps) -> str:
    """``yes`` within ``eps``, ``no`` beyond ``eps + ci``, ``inconclusive`` in between."""
    gap = abs(float(empirical) - total)
    if gap <= eps:
        return "yes"
    if gap > eps + ci:
        return "no"
    return "inconclusive"


def combine_verdicts(verdicts) -> str:
    verdicts = list(verdicts)
    if "no" in verdicts:
        return "no"
    if "inconclusive" in verdicts:
        return "inconclusive"
    return "yes"


@dataclass
class Representativeness:
    reports: list
    overall: str

    @property
    def ok(self) -> bool:
        return self.overall == "yes"


def representative(g, pool, eps: float, mu0, mu1, n=DEFAULT_MC_SAMPLES, seed=0) -> Representativeness:
    """Check two-way ``eps``-representativeness of grid ``g`` for a list of set pairs."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    reports = []
    for k, (h0, h1) in enumerate(pool):
        rep = loss_report(h0, h1, g, mu0, mu1, n, derive_seed(seed, k))
        rep.verdict = verdict(rep.empirical, rep.total_estimate, rep.total_ci_halfwidth, eps)
        rep.pair_id = str(k)
        reports.append(rep)
    return Representativeness(reports, combine_verdicts(r.verdict for r in reports))


CSV_COLUMNS = ("pair_id", "empirical", "total", "ci", "method", "verdict")


def write_reports_csv(path, reports) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in reports:
            w.writerow([r.pair_id, repr(float(r.empirical)), repr(float(r.total_estimate)),
                        repr(float(r.total_ci_halfwidth)), r.method_label(), r.verdict])
