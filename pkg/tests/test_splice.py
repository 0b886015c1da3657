import math

import numpy as np
import pytest

from app.curves import arc_length, base_capture
from app.errors import BudgetExceededError, DegenerateSelectionError, OffSetPointError
from app.geometry import DiscreteSet, norms
from app.tools.analyzer import measure_c0, splice_frame
from app.tools.examples import middle_thirds
from app.tools.hcurve import build_H
from app.tools.library import target_library
from app.tools.splice import ball_radius, copy_scale, select_disjoint_subsequence, splice

LAM = 0.3
X = np.array([0.0, 0.0])
YS = [np.array([2 / 9, 0.0]), np.array([1 / 9, 0.0]), np.array([1 / 27, 0.0])]


@pytest.fixture(scope="module")
def H3(library3):
    return build_H(2, library3, 3)


@pytest.fixture(scope="module")
def cantor_splice(H3):
    K = middle_thirds(3)
    G = base_capture(K)
    F, records = splice(G, K, X, YS, H3, LAM, 0.5)
    return K, G, F, records


def test_ball_and_copy_constants():
    assert ball_radius(0.3, 0.09) == pytest.approx(0.0016875)
    assert copy_scale(0.3, 0.09, 2) == pytest.approx(0.3 * 0.09 / (32 * math.sqrt(2)))
    assert copy_scale(0.3, 0.09, 2) == pytest.approx(5.966e-4, rel=1e-3)


def test_far_sites_are_all_kept():
    ys = [[1.0, 0.0], [0.5, 0.0], [0.25, 0.0]]
    sites = [[0.5, 1.0], [0.25, 1.0], [0.125, 1.0]]
    assert select_disjoint_subsequence(X, ys, sites, LAM) == [0, 1, 2]


def test_coincident_sites_keep_one():
    ys = [[1.0, 0.0], [0.9, 0.0], [0.5, 0.0]]
    p, q = [0.5, 0.5], [0.0, 0.5]
    assert select_disjoint_subsequence(X, ys, [p, p, q], LAM) == [0, 2]


def test_selection_needs_two_survivors():
    with pytest.raises(DegenerateSelectionError):
        select_disjoint_subsequence(X, [[1.0, 0.0], [0.9, 0.0]], [[0.5, 0.5], [0.5, 0.5]], LAM)


def test_single_strand_splice_stays_within_its_budget():
    K = DiscreteSet.from_points([[0.0, 0.0], [1.0, 0.0]], 0.01)
    H = build_H(2, target_library(2, 1.0, 1), 1)
    G = base_capture(K)
    F, records = splice(G, K, K.points[0], [K.points[1]], H, LAM, 1.0)
    (record,) = records
    assert [r["kind"] for r in record.reroutes] == ["copy"]
    assert 0.0 < record.length_delta <= LAM * 1.0
    assert record.length_delta == pytest.approx(arc_length(F.curve) - arc_length(G.curve))
    np.testing.assert_array_equal(F.curve.vertices[0], G.curve.vertices[0])
    np.testing.assert_array_equal(F.curve.vertices[-1], G.curve.vertices[-1])


def test_cantor_excision_balls_are_disjoint(cantor_splice):
    _, _, _, records = cantor_splice
    assert len(records) == 2
    for a in range(len(records)):
        for b in range(a + 1, len(records)):
            gap = float(norms(np.subtract(records[a].site, records[b].site)))
            assert gap > records[a].ball_radius + records[b].ball_radius


def test_cantor_splice_leaves_vertices_outside_the_balls(cantor_splice):
    _, G, F, records = cantor_splice

    def outside(vertices):
        keep = np.ones(len(vertices), dtype=bool)
        for r in records:
            keep &= norms(vertices - np.asarray(r.site)) > r.ball_radius * (1 + 1e-6)
        return vertices[keep]

    np.testing.assert_array_equal(outside(F.curve.vertices), outside(G.curve.vertices))


def test_cantor_splice_copies_H_verbatim(cantor_splice, H3):
    _, _, F, records = cantor_splice
    for r in records:
        site = np.asarray(r.site)
        box = np.abs(F.curve.vertices - site).max(axis=1) <= r.copy_scale * (1 + 1e-9)
        expected = np.unique(r.copy_scale * H3.curve.vertices + site, axis=0)
        np.testing.assert_array_equal(np.unique(F.curve.vertices[box], axis=0), expected)


def test_cantor_splice_ledger(cantor_splice):
    K, G, F, records = cantor_splice
    total = sum(r.length_delta for r in records)
    assert total == pytest.approx(arc_length(F.curve) - arc_length(G.curve), abs=1e-12)
    assert total < 0.5
    c0 = measure_c0(records)
    assert c0["sites"] == 2
    assert c0["spread"] <= 1.5
    frame = splice_frame(records)
    assert np.all(frame["length_delta"] <= c0["c0"] * frame["gap_witness"] * (1 + 1e-12))


def test_cantor_splice_keeps_the_capture(cantor_splice):
    K, _, F, _ = cantor_splice
    assert F.coverage <= K.resolution
    assert F.captured is K


def test_splice_refuses_an_exhausted_budget(H3, cantor3):
    G = base_capture(cantor3)
    with pytest.raises(BudgetExceededError) as err:
        splice(G, cantor3, X, YS, H3, LAM, 1e-9)
    assert err.value.spent > err.value.budget


def test_splice_needs_points_of_the_set(H3, cantor3):
    G = base_capture(cantor3)
    with pytest.raises(OffSetPointError):
        splice(G, cantor3, [0.5, 0.0], YS, H3, LAM, 0.5)
