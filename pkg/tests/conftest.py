import numpy as np
import pytest
from hypothesis import settings

from gridapprox.sets import RectUnion

# Fixed example streams: statistical checks must not flake between runs.
settings.register_profile("repro", derandomize=True, deadline=None)
settings.load_profile("repro")


def random_rect_union(rng, box=(0.0, 1.0), cuts=5, p=0.35):
    """Disjoint rectangles: a random subset of the cells of a random breakpoint grid."""
    lo, hi = box
    xs = np.sort(rng.uniform(lo, hi, cuts))
    ys = np.sort(rng.uniform(lo, hi, cuts))
    rects = [(xs[i], xs[i + 1], ys[j], ys[j + 1])
             for i in range(cuts - 1) for j in range(cuts - 1) if rng.random() < p]
    return RectUnion(tuple(rects))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
