import math

import numpy as np
import pytest

from app.geometry import DiscreteSet
from app.tangents import TruncatedClosedSet
from app.tools.examples import middle_thirds
from app.tools.library import target_library


def segment_points(a, b, count):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return a + np.linspace(0.0, 1.0, count)[:, None] * (b - a)


def horizontal_net(lo, hi, count, y=0.0, resolution=None):
    xs = np.linspace(lo, hi, count)
    pts = np.column_stack([xs, np.full(count, y)])
    step = (hi - lo) / (count - 1)
    return DiscreteSet(2, resolution or step, pts)


def line_target(angle, R=1.0, step=0.005):
    count = int(round(2 * R / step)) + 1
    u = np.array([math.cos(angle), math.sin(angle)])
    pts = np.linspace(-R, R, count)[:, None] * u
    return TruncatedClosedSet.truncating(pts, step, R)


@pytest.fixture
def unit_segment_net():
    """[0, 1] x {0} at step 1e-4."""
    return horizontal_net(0.0, 1.0, 10001)


@pytest.fixture
def circle_arc_net():
    """Unit circle centred at (1, 0) near the origin, spacing about 2e-6."""
    theta = np.linspace(math.pi - 0.01, math.pi + 0.01, 10001)
    pts = np.column_stack([1.0 + np.cos(theta), np.sin(theta)])
    return DiscreteSet(2, 2e-6, pts)


@pytest.fixture
def vertical_line():
    return line_target(math.pi / 2)


@pytest.fixture
def horizontal_line():
    return line_target(0.0)


@pytest.fixture
def cantor3():
    return middle_thirds(3)


@pytest.fixture(scope="session")
def library3():
    return target_library(2, 1.0, 3)
