import math

import numpy as np
import pytest

from app.curves import PolylineCurve, evaluate
from app.errors import InvalidInputError, OffSetPointError, ScaleResolutionError
from app.geometry import DiscreteSet, aw_discrepancy, translate_scale, truncate
from app.tangents import (
    ScaleSchedule,
    TruncatedClosedSet,
    approximates_tangent,
    blowup,
    pseudotangent_witness,
    unbounded_components_check,
)
from tests.conftest import segment_points


def ray_target(R=1.0, step=0.005):
    return TruncatedClosedSet.truncating(segment_points((0, 0), (R, 0), int(round(R / step)) + 1), step, R)


def test_blowup_of_a_segment_at_its_endpoint(unit_segment_net):
    T = blowup(unit_segment_net, [0.0, 0.0], 0.01, 1.0)
    pts = T.base.points
    assert T.contains_origin
    assert np.all(pts[:, 1] == 0.0)
    assert pts[:, 0].min() == 0.0
    assert pts[:, 0].max() == pytest.approx(1.0, abs=0.011)
    assert T.base.resolution == pytest.approx(0.01)


def test_blowup_recentres_a_point():
    K = DiscreteSet.from_points([[1.0, 1.0]], 0.01)
    T = blowup(K, [1.0, 1.0], 0.5, 1.0)
    np.testing.assert_array_equal(T.base.points, [[0.0, 0.0]])


def test_blowup_is_a_dilation(unit_segment_net):
    T = blowup(unit_segment_net, [0.0, 0.0], 0.5, 2.0)
    assert T.base.points[:, 0].max() == pytest.approx(2.0)


def test_blowup_of_circle_is_near_its_tangent_line(circle_arc_net, vertical_line):
    T = blowup(circle_arc_net, [0.0, 0.0], 1e-3, 1.0)
    assert aw_discrepancy(T.base, vertical_line.base, 1.0) <= 5e-3


def test_blowup_rejects_points_off_the_set(unit_segment_net):
    with pytest.raises(OffSetPointError):
        blowup(unit_segment_net, [0.5, 0.5], 0.1, 1.0)


def test_blowup_of_a_curve_samples_the_window():
    g = PolylineCurve(np.array([[-1.0, 0.0], [1.0, 0.0]]))
    T = blowup(g, [0.0, 0.0], 1e-3, 1.0)
    assert T.base.points[:, 0].min() == pytest.approx(-1.0, abs=0.01)
    assert T.base.points[:, 0].max() == pytest.approx(1.0, abs=0.01)


def test_segment_has_its_ray_as_tangent(unit_segment_net):
    schedule = ScaleSchedule(tuple(2.0 ** -k for k in range(7)))
    profile = approximates_tangent(unit_segment_net, [0.0, 0.0], schedule, ray_target(), 0.02)
    assert profile.verdict
    assert max(profile.discrepancies) <= 0.02


def test_circle_tangent_is_the_vertical_line(circle_arc_net, vertical_line):
    schedule = ScaleSchedule.geometric(0.1, 0.1, 3)
    profile = approximates_tangent(circle_arc_net, [0.0, 0.0], schedule, vertical_line, 0.05)
    assert profile.verdict
    assert profile.rows[-1].scale == pytest.approx(1e-3)


def test_circle_tangent_is_not_the_horizontal_line(circle_arc_net, horizontal_line):
    schedule = ScaleSchedule.geometric(0.1, 0.1, 3)
    profile = approximates_tangent(circle_arc_net, [0.0, 0.0], schedule, horizontal_line, 0.05)
    assert not profile.verdict
    assert profile.rows[-1].discrepancy > 0.9


def test_profile_frame_has_one_row_per_scale(unit_segment_net):
    schedule = ScaleSchedule((0.5, 0.25))
    frame = approximates_tangent(unit_segment_net, [0.0, 0.0], schedule, ray_target(), 0.02).to_frame()
    assert list(frame.columns) == ["scale", "basepoint", "discrepancy", "radius"]
    assert list(frame["scale"]) == [0.5, 0.25]


def test_scale_schedule_must_decrease():
    with pytest.raises(InvalidInputError):
        ScaleSchedule((0.1, 0.1))
    with pytest.raises(InvalidInputError):
        ScaleSchedule((0.1, -0.01))
    with pytest.raises(InvalidInputError):
        ScaleSchedule(())


def test_schedule_below_resolution_is_rejected(unit_segment_net):
    with pytest.raises(ScaleResolutionError):
        approximates_tangent(unit_segment_net, [0.0, 0.0], ScaleSchedule((1e-5,)), ray_target(), 0.02)


def test_constant_basepoints_reduce_to_a_tangent(unit_segment_net, horizontal_line):
    x = [0.5, 0.0]
    schedule = ScaleSchedule((0.1, 0.05, 0.01))
    plain = approximates_tangent(unit_segment_net, x, schedule, horizontal_line, 0.02)
    moving = pseudotangent_witness(unit_segment_net, x, [x] * 3, schedule, horizontal_line, 0.02)
    assert moving.discrepancies == plain.discrepancies


def test_interior_basepoints_see_the_full_line(unit_segment_net, horizontal_line):
    basepoints = [[1.0 / i, 0.0] for i in range(1, 11)]
    schedule = ScaleSchedule(tuple(1.0 / i ** 2 for i in range(1, 11)))
    profile = pseudotangent_witness(unit_segment_net, [0.0, 0.0], basepoints, schedule, horizontal_line, 0.02)
    assert profile.verdict
    ray = pseudotangent_witness(unit_segment_net, [0.0, 0.0], basepoints, schedule, ray_target(), 0.02)
    assert not ray.verdict


def test_basepoints_must_approach_the_point(unit_segment_net, horizontal_line):
    with pytest.raises(InvalidInputError):
        pseudotangent_witness(unit_segment_net, [0.0, 0.0], [[0.1, 0.0], [0.5, 0.0]],
                              ScaleSchedule((0.1, 0.01)), horizontal_line, 0.02)


def test_singleton_has_a_bounded_component():
    T = TruncatedClosedSet(base=DiscreteSet.from_points([[0.0, 0.0]], 0.005), truncation_radius=1.0)
    assert not unbounded_components_check(T)


def test_cross_components_reach_the_sphere(horizontal_line):
    pts = np.vstack([segment_points((-1, 0), (1, 0), 401), segment_points((0, -1), (0, 1), 401)])
    assert unbounded_components_check(TruncatedClosedSet.truncating(pts, 0.005, 1.0))
    assert unbounded_components_check(horizontal_line)


def test_isolated_point_is_a_bounded_component():
    pts = np.vstack([segment_points((-1, 0), (1, 0), 401), [[0.0, 0.5]]])
    assert not unbounded_components_check(TruncatedClosedSet.truncating(pts, 0.005, 1.0))


def test_truncated_set_checks_its_origin_flag():
    with pytest.raises(InvalidInputError):
        TruncatedClosedSet(base=DiscreteSet.from_points([[0.5, 0.0]], 0.005), truncation_radius=1.0)
    T = TruncatedClosedSet.truncating([[0.5, 0.0], [3.0, 0.0]], 0.005, 1.0)
    assert not T.contains_origin
    assert len(T.base) == 1


@pytest.mark.parametrize("tol", [1e-12, 0.5])
def test_final_blowup_is_its_own_tangent(unit_segment_net, tol):
    x = [0.5, 0.0]
    schedule = ScaleSchedule((0.1, 0.05, 0.01))
    T = blowup(unit_segment_net, x, 0.01, 1.0)
    profile = approximates_tangent(unit_segment_net, x, schedule, T, tol)
    assert profile.rows[-1].discrepancy == 0.0
    assert profile.verdict


@pytest.mark.parametrize("r", [0.5, 0.3, 0.01])
def test_blowup_commutes_with_translate_scale_and_truncate(cantor3, r):
    x = cantor3.points[3]
    B = blowup(cantor3, x, r, 1.0)
    assert np.array_equal(B.base.points, truncate(translate_scale(cantor3, x, r), 1.0))
    assert B.base.resolution == cantor3.resolution / r


CONNECTED_POLYLINES = [
    PolylineCurve(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]])),
    PolylineCurve(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 0.0]])),
    PolylineCurve(np.column_stack([np.cos(np.linspace(0.0, 3.0, 40)), np.sin(np.linspace(0.0, 3.0, 40))])),
]


@pytest.mark.parametrize("curve", CONNECTED_POLYLINES)
def test_blowups_of_connected_polylines_have_only_unbounded_components(curve):
    schedule = ScaleSchedule((0.2, 0.1, 0.05))
    for t in (0.0, 0.1, 0.37, 0.5, 0.83, 1.0):
        x = evaluate(curve, t)
        for r in schedule.scales:
            assert unbounded_components_check(blowup(curve, x, r, 1.0))
