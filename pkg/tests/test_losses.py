import csv
import math
from fractions import Fraction

import numpy as np
import pytest

from conftest import random_rect_union
from gridapprox import losses as L
from gridapprox import measures as M
from gridapprox import sets as S
from gridapprox.hypotheses import EMPTY, Grid

U02 = M.UniformInterval(0, 2)
SQ = S.RectUnion([(0, 1, 0, 1)])
FULL = S.HalfPlaneIntersection(())


def test_empirical_examples():
    g = Grid([0.5, 2], [0.5, 2])
    assert L.empirical_loss(SQ, SQ, g) == 0
    assert L.empirical_loss(FULL, EMPTY, g) == 1
    assert L.empirical_loss(SQ, EMPTY, g) == Fraction(1, 4)


def test_exact_examples():
    assert L.total_loss_exact(SQ, SQ, U02, U02) == 0
    assert L.total_loss_exact(SQ, EMPTY, U02, U02) == 0.25
    assert L.total_loss_exact(SQ, S.RectUnion([(0, 2, 0, 1)]), U02, U02) == 0.25


def test_exact_respects_half_open_atoms():
    atoms = M.DiscreteAtoms([(0.0, 0.5), (1.0, 0.5)])
    # the atom at 1 sits on the open right edge of SQ
    assert L.total_loss_exact(SQ, EMPTY, atoms, atoms) == 0.25
    assert L.total_loss_atoms(SQ, EMPTY, atoms, atoms) == 0.25


def test_mc_examples():
    est, ci = L.total_loss_mc(SQ, SQ, U02, U02, 1000, seed=1)
    assert est == 0 and ci == 0
    u = M.UniformInterval(-1, 1)
    est, ci = L.total_loss_mc(S.Disk((0, 0), 1), EMPTY, u, u, 100_000, seed=5)
    assert abs(est - math.pi / 4) < 0.01
    assert 0 < ci < 0.01


def test_mc_independent_of_workers():
    u = M.UniformInterval(-1, 1)
    d = S.Disk((0.1, 0), 0.7)
    one = L.total_loss_mc(d, EMPTY, u, u, 150_000, seed=9, workers=1)
    four = L.total_loss_mc(d, EMPTY, u, u, 150_000, seed=9, workers=4)
    assert one == four


def test_mc_agrees_with_exact_under_mixtures(rng):
    mu = M.Mixture([(0.6, M.UniformInterval(0, 1)), (0.4, M.UniformInterval(0.3, 0.5))])
    misses = 0
    for k in range(30):
        h0, h1 = random_rect_union(rng), random_rect_union(rng)
        exact = L.total_loss_exact(h0, h1, mu, mu)
        est, ci = L.total_loss_mc(h0, h1, mu, mu, 20_000, seed=k)
        misses += abs(est - exact) > 3 * ci + 1e-12
    assert misses <= 1


def test_pseudometric_triangle(rng):
    mu0 = M.Mixture([(0.5, M.UniformInterval(0, 1)), (0.5, M.DiscreteAtoms([(0.25, 0.5), (0.75, 0.5)]))])
    mu1 = M.UniformInterval(0, 1)
    g = Grid(rng.uniform(size=30), rng.uniform(size=30))
    for _ in range(100):
        a, b, c = (random_rect_union(rng) for _ in range(3))
        for loss in (lambda p, q: L.total_loss_exact(p, q, mu0, mu1),
                     lambda p, q: float(L.empirical_loss(p, q, g))):
            assert loss(a, a) == 0
            assert loss(a, b) == pytest.approx(loss(b, a), abs=1e-12)
            assert loss(a, c) <= loss(a, b) + loss(b, c) + 1e-9


def test_empirical_permutation_invariance(rng):
    a, b = rng.normal(size=15), rng.normal(size=15)
    h0, h1 = S.Disk((0, 0), 1), random_rect_union(rng, (-1, 1))
    base = L.empirical_loss(h0, h1, Grid(a, b))
    assert L.empirical_loss(h0, h1, Grid(rng.permutation(a), b)) == base
    assert L.empirical_loss(h0, h1, Grid(a, rng.permutation(b))) == base


def test_total_loss_dispatch():
    u = M.UniformInterval(-1, 1)
    assert L.total_loss(SQ, EMPTY, u, u)[2] == L.EXACT
    atom = M.DiscreteAtoms([(0.0, 1.0)])
    est, ci, method = L.total_loss(S.Disk((0, 0), 1), EMPTY, atom, atom)
    assert (est, ci, method) == (1.0, 0.0, L.EXACT)
    assert L.total_loss(S.Disk((0, 0), 1), EMPTY, u, u, 1000)[2] == L.MONTE_CARLO


def test_verdicts():
    assert L.verdict(Fraction(1, 2), 0.45, 0.0, 0.1) == "yes"
    assert L.verdict(Fraction(1, 2), 0.35, 0.01, 0.1) == "no"
    assert L.verdict(Fraction(1, 2), 0.395, 0.01, 0.1) == "inconclusive"
    assert L.combine_verdicts(["yes", "inconclusive"]) == "inconclusive"
    assert L.combine_verdicts(["yes", "inconclusive", "no"]) == "no"


def test_representative_examples():
    g = Grid([0.5, 1.5], [0.5, 1.5])
    assert L.representative(g, [(SQ, SQ)], 1e-9, U02, U02).ok
    atom = M.DiscreteAtoms([(0.5, 1.0)])
    pool = [(SQ, EMPTY), (S.Disk((3, 3), 1), SQ), (S.Disk((0.5, 0.5), 0.1), EMPTY)]
    rep = L.representative(Grid([0.5], [0.5]), pool, 1e-9, atom, atom)
    assert rep.ok
    assert all(float(r.empirical) == r.total_estimate for r in rep.reports)


def test_adversarial_pool_not_representative():
    g = Grid([0.1, 0.2], [0.1, 0.2])
    dodge = S.RectUnion([(0.5, 2.0, 0.0, 2.0)])  # mass 0.75 under U02^2, misses every grid point
    half = S.RectUnion([(1.0, 2.0, 0.0, 2.0)])  # mass 0.5
    assert L.total_loss_exact(half, EMPTY, U02, U02) == 0.5
    rep = L.representative(g, [(half, EMPTY), (dodge, EMPTY)], 0.1, U02, U02)
    assert not rep.ok and [r.verdict for r in rep.reports] == ["no", "no"]


def test_reports_csv(tmp_path):
    g = Grid([0.5, 1.5], [0.5, 1.5])
    u = M.UniformInterval(0, 2)
    rep = L.representative(g, [(SQ, EMPTY), (S.Disk((1, 1), 0.5), EMPTY)], 0.2, u, u, n=1000, seed=3)
    path = tmp_path / "r.csv"
    L.write_reports_csv(path, rep.reports)
    rows = list(csv.DictReader(open(path)))
    assert tuple(rows[0]) == L.CSV_COLUMNS
    assert rows[0]["method"] == "exact" and rows[0]["empirical"] == "0.25"
    assert rows[1]["method"].startswith("monte_carlo(n=1000,seed=")
