import json

import numpy as np
import pytest
from pydantic import ValidationError

from app.curves import base_capture
from app.disconnect import estimate_lambda
from app.errors import InvalidInputError, InvalidTargetError
from app.schemas import ReportModel, RunManifest
from app.tools import data_processor as io
from app.tools.examples import middle_thirds
from app.tools.library import library_payload, target_library


def test_report_payload_validates_with_its_alias():
    report = estimate_lambda(middle_thirds(2))
    model = ReportModel.model_validate(io.report_payload(report))
    assert model.lambda_ == report.lambda_estimate
    assert model.model_dump(by_alias=True)["lambda"] == report.lambda_estimate


def test_manifest_status_is_restricted():
    with pytest.raises(ValidationError):
        RunManifest(command="lambda", inputs=[], parameters={}, outputs=[], status=3, wall_time=0.1)


def test_canonical_json_is_sorted_and_finite():
    assert io.dumps({"b": 1, "a": 0.1}) == '{"a": 0.1, "b": 1}\n'
    with pytest.raises(ValueError):
        io.dumps({"a": float("nan")})


def test_library_round_trip(tmp_path):
    lib = target_library(2, 1.0, 3)
    path = io.write_json(str(tmp_path / "lib.json"), library_payload(lib))
    again = io.read_library(path)
    assert again.names == lib.names
    for a, b in zip(lib.targets, again.targets):
        np.testing.assert_array_equal(a.set.base.points, b.set.base.points)
        np.testing.assert_array_equal(a.spine, b.spine)


def test_library_with_a_bounded_component_is_rejected(tmp_path):
    payload = library_payload(target_library(2, 1.0, 1))
    payload["targets"][0]["points"].append([0.0, 0.5])
    path = io.write_json(str(tmp_path / "lib.json"), payload)
    with pytest.raises(InvalidTargetError):
        io.read_library(path)


def test_duplicate_target_names_are_rejected(tmp_path):
    payload = library_payload(target_library(2, 1.0, 2))
    payload["targets"][1]["name"] = "line"
    path = tmp_path / "lib.json"
    path.write_text(json.dumps(payload))
    with pytest.raises(InvalidInputError):
        io.read_library(str(path))


def test_read_object_tells_curves_from_sets(tmp_path):
    K = middle_thirds(1)
    set_path = io.write_json(str(tmp_path / "k.json"), io.set_payload(K))
    curve_path = io.write_json(str(tmp_path / "g.json"), io.curve_payload(base_capture(K).curve))
    assert len(io.read_object(set_path)) == 4
    assert io.read_object(curve_path).dimension == 2
