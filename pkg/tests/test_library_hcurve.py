import numpy as np
import pytest

from app.curves import arc_length
from app.errors import InvalidInputError
from app.tangents import unbounded_components_check
from app.tools.hcurve import build_H
from app.tools.library import library_payload, target_library


def test_library_of_one_is_the_horizontal_line():
    lib = target_library(2, 1.0, 1)
    assert lib.names == ["line"]
    pts = lib.get("line").set.base.points
    assert np.abs(pts[:, 1]).max() < 1e-12
    assert pts[:, 0].min() == pytest.approx(-1.0)


def test_canonical_targets_reach_the_sphere():
    lib = target_library(2, 1.0, 6)
    assert lib.names[:5] == ["line", "cross", "star-3", "parallel-pair", "comb"]
    for t in lib.targets:
        assert t.set.contains_origin
        assert unbounded_components_check(t.set)


def test_targets_embed_in_the_first_two_coordinates():
    lib = target_library(3, 2.0, 3)
    for t in lib.targets:
        assert t.set.dimension == 3
        assert np.all(t.set.base.points[:, 2] == 0.0)
        assert np.abs(t.set.base.points).max() <= 2.0


def test_library_parameters_are_checked():
    with pytest.raises(InvalidInputError):
        target_library(2, 1.0, 0)
    with pytest.raises(InvalidInputError):
        target_library(1, 1.0, 1)
    with pytest.raises(InvalidInputError):
        target_library(2, 1.0, 1).get("spiral")


def test_library_payload_lists_every_target(library3):
    payload = library_payload(library3)
    assert [t["name"] for t in payload["targets"]] == library3.names
    assert payload["truncation_radius"] == 1.0


def test_H_for_a_line_has_the_line_as_tangent():
    lib = target_library(2, 1.0, 1)
    H = build_H(2, lib, 4)
    profile = H.certify(tol=0.05)["line"]
    assert len(profile.rows) == 4
    assert max(profile.discrepancies) <= 0.05


def test_H_realizes_every_target_of_a_library(library3):
    H = build_H(2, library3, 12)
    profiles = H.certify(tol=0.05)
    assert set(profiles) == set(library3.names)
    assert all(p.verdict for p in profiles.values())
    assert arc_length(H.curve) <= H.budget


def test_H_shape(library3):
    H = build_H(2, library3, 3)
    np.testing.assert_array_equal(H.curve.vertices[-1], [0.0, 0.0])
    np.testing.assert_array_equal(H.curve.vertices[0], H.anchor)
    assert np.abs(H.anchor).max() == 1.0
    assert np.abs(H.curve.vertices).max() <= 1.0 + 1e-12
    assert H.block_scales == sorted(H.block_scales, reverse=True)
    assert H.schedule_for(1).scales == (H.block_scales[1],)


def test_H_depth_must_cover_the_library(library3):
    with pytest.raises(InvalidInputError):
        build_H(2, library3, 2)
    with pytest.raises(InvalidInputError):
        build_H(3, library3, 3)
