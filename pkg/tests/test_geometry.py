import math

import numpy as np
import pytest

from app.errors import DimensionMismatchError, EmptySetError, InvalidInputError
from app.geometry import (
    DiscreteSet,
    aw_discrepancy,
    excess,
    excess_reference,
    great_circle_arc,
    hausdorff_distance,
    norms,
    translate_scale,
    truncated_excess,
)
from tests.conftest import horizontal_net, segment_points


def test_excess_is_asymmetric():
    A = horizontal_net(0.0, 1.0, 101)
    B = DiscreteSet.from_points([[0.0, 0.0]], 0.01)
    assert excess(A, B) == pytest.approx(1.0, abs=1e-12)
    assert excess(B, A) == pytest.approx(0.0, abs=1e-12)


def test_excess_of_a_set_over_itself_is_zero(unit_segment_net):
    assert excess(unit_segment_net, unit_segment_net) == 0.0


def test_truncated_excess_of_ray_over_segment():
    ray = horizontal_net(0.0, 10.0, 1001)
    seg = horizontal_net(0.0, 1.0, 101)
    assert truncated_excess(ray, seg, 1.0) == pytest.approx(0.0, abs=1e-9)


def test_truncated_excess_only_sees_the_ball():
    seg = horizontal_net(0.0, 1.0, 101)
    origin = DiscreteSet.from_points([[0.0, 0.0]], 0.01)
    assert truncated_excess(seg, origin, 0.5) == pytest.approx(0.5, abs=1e-12)


def test_truncated_excess_of_empty_truncation_is_zero():
    far = DiscreteSet.from_points([[5.0, 0.0]], 0.01)
    anything = horizontal_net(-1.0, 1.0, 11)
    assert truncated_excess(far, anything, 1.0) == 0.0


def test_discrepancy_of_parallel_lines():
    A = horizontal_net(-2.0, 2.0, 401)
    B = horizontal_net(-2.0, 2.0, 401, y=0.1)
    assert aw_discrepancy(A, B, 1.0) == pytest.approx(0.1, abs=1e-9)
    assert aw_discrepancy(A, A, 1.0) == 0.0


def test_discrepancy_of_cross_and_line():
    line = segment_points((-1, 0), (1, 0), 201)
    cross = np.vstack([line, segment_points((0, -1), (0, 1), 201)])
    A = DiscreteSet.from_points(cross, 0.01)
    B = DiscreteSet.from_points(line, 0.01)
    assert aw_discrepancy(A, B, 1.0) == pytest.approx(1.0, abs=1e-12)


def test_translate_scale_recentres():
    A = DiscreteSet.from_points([[1.0, 1.0]], 0.01)
    out = translate_scale(A, [1.0, 1.0], 0.5)
    np.testing.assert_array_equal(out.points, [[0.0, 0.0]])
    assert out.resolution == pytest.approx(0.02)


def test_translate_scale_dilates():
    out = translate_scale(horizontal_net(0.0, 1.0, 101), [0.0, 0.0], 0.5)
    assert out.points[:, 0].max() == pytest.approx(2.0)
    assert np.all(out.points[:, 1] == 0.0)


def test_accelerated_excess_matches_reference_bit_for_bit():
    rng = np.random.default_rng(7)
    for _ in range(50):
        d = int(rng.integers(1, 4))
        A = rng.normal(size=(int(rng.integers(60, 120)), d))
        B = rng.normal(size=(int(rng.integers(60, 120)), d)) * 1.5
        assert excess(A, B) == excess_reference(A, B)


def test_hausdorff_is_symmetric():
    rng = np.random.default_rng(3)
    A, B = rng.random((40, 2)), rng.random((30, 2))
    assert hausdorff_distance(A, B) == hausdorff_distance(B, A)


def test_discrete_set_merges_near_duplicates():
    K = DiscreteSet.from_points([[0.0, 0.0], [1e-6, 0.0], [1.0, 0.0]], 0.01)
    assert len(K) == 2


def test_discrete_set_rejects_bad_input():
    with pytest.raises(EmptySetError):
        DiscreteSet(2, 0.1, np.zeros((0, 2)))
    with pytest.raises(DimensionMismatchError):
        DiscreteSet(3, 0.1, np.zeros((2, 2)))
    with pytest.raises(InvalidInputError):
        DiscreteSet(2, 0.0, np.zeros((2, 2)))
    with pytest.raises(InvalidInputError):
        DiscreteSet(2, 0.1, [[0.0, float("nan")]])


def test_invalid_input_is_a_value_error():
    with pytest.raises(ValueError):
        DiscreteSet(2, -1.0, np.zeros((1, 2)))


def test_great_circle_arc_stays_on_the_sphere():
    centre = np.array([1.0, 2.0])
    a, b = centre + [0.5, 0.0], centre + [0.0, 0.5]
    arc = great_circle_arc(centre, a, b, 1e-4)
    np.testing.assert_array_equal(arc[0], a)
    np.testing.assert_array_equal(arc[-1], b)
    np.testing.assert_allclose(norms(arc - centre), 0.5, atol=1e-12)
    chord = norms(np.diff(arc, axis=0)).max()
    # sagitta of a chord c on radius r is r - sqrt(r^2 - c^2/4)
    assert 0.5 - math.sqrt(0.25 - chord ** 2 / 4) <= 1e-4 + 1e-12


def test_great_circle_arc_antipodal_uses_lowest_free_axis():
    centre = np.zeros(3)
    a, b = np.array([0.0, 0.0, 1.0]), np.array([0.0, 0.0, -1.0])
    arc = great_circle_arc(centre, a, b, 1e-3)
    np.testing.assert_allclose(arc[:, 1], 0.0, atol=1e-12)
    assert np.abs(arc[:, 0]).max() == pytest.approx(1.0, abs=1e-3)


def test_excess_satisfies_the_triangle_bound():
    rng = np.random.default_rng(5)
    for _ in range(200):
        d = int(rng.integers(1, 4))
        A, B, C = (rng.random((int(rng.integers(1, 12)), d)) for _ in range(3))
        assert excess(A, C) <= excess(A, B) + excess(B, C) + 1e-12


def test_truncated_excess_grows_with_the_radius():
    rng = np.random.default_rng(9)
    radii = np.linspace(0.05, 2.0, 40)
    for _ in range(20):
        A = rng.uniform(-1.0, 1.0, (30, 2))
        B = rng.uniform(-1.0, 1.0, (30, 2))
        values = [truncated_excess(A, B, r) for r in radii]
        assert values == sorted(values)


def test_translate_scale_divides_every_distance():
    rng = np.random.default_rng(2)
    K = DiscreteSet.from_points(rng.random((30, 2)), 1e-9)
    S = translate_scale(K, rng.random(2), 0.3)
    i, j = np.triu_indices(len(K), k=1)
    before = norms(K.points[i] - K.points[j])
    after = norms(S.points[i] - S.points[j])
    np.testing.assert_allclose(after, before / 0.3, rtol=1e-9)


def test_dyadic_scale_about_the_origin_is_exact():
    rng = np.random.default_rng(3)
    K = DiscreteSet.from_points(rng.random((30, 3)), 1e-9)
    S = translate_scale(K, [0.0, 0.0, 0.0], 0.25)
    i, j = np.triu_indices(len(K), k=1)
    assert np.array_equal(norms(S.points[i] - S.points[j]), norms(K.points[i] - K.points[j]) / 0.25)
