"""Reading and writing the JSON and CSV files of the toolkit."""
import json
import logging
import os
import tempfile
from typing import Any, Dict, Optional, Tuple, Type

import numpy as np
import pandas as pd
from pydantic import BaseModel, ValidationError

from app.curves import PolylineCurve
from app.disconnect import DisconnectionReport
from app.errors import InvalidInputError
from app.geometry import DiscreteSet
from app.schemas import CurveModel, DiscreteSetModel, LibraryModel, TruncatedSetModel
from app.tangents import TruncatedClosedSet
from app.tools.library import Target, TargetLibrary, validate_target

logger = logging.getLogger(__name__)


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except Exception:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps(payload: Dict[str, Any]) -> str:
    """Canonical JSON: sorted keys, shortest round-trip floats."""
    return json.dumps(payload, sort_keys=True, allow_nan=False) + "\n"


def write_json(path: str, payload: Dict[str, Any]) -> str:
    """
    Write a payload as canonical JSON, atomically.

    Args:
        path: Destination file; parent directories are created
        payload: JSON-ready dict without NaN or infinities

    Returns:
        The path written
    """
    _atomic_write(path, dumps(payload))
    logger.debug(f"wrote {path}")
    return path


def write_csv(path: str, frame: pd.DataFrame) -> str:
    """Write a frame as CSV without its index, atomically."""
    _atomic_write(path, frame.to_csv(index=False))
    logger.debug(f"wrote {path} ({len(frame)} rows)")
    return path


def load_model(path: str, model: Type[BaseModel]) -> BaseModel:
    """Parse and validate a JSON file; every failure is invalid input."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        return model.model_validate(raw)
    except FileNotFoundError:
        raise InvalidInputError(f"no such file: {path}")
    except json.JSONDecodeError as e:
        raise InvalidInputError(f"{path} is not valid JSON: {e}")
    except ValidationError as e:
        raise InvalidInputError(f"{path} is not a valid {model.__name__}: {e.errors()[0]['msg']}")


def set_payload(K: DiscreteSet, metadata: Optional[dict] = None) -> Dict[str, Any]:
    """
    Set file payload.

    Args:
        K: The set
        metadata: Optional provenance dict, stored under ``metadata``

    Returns:
        Dict with dimension, resolution and points
    """
    payload = {"dimension": K.dimension, "resolution": K.resolution, "points": K.points.tolist()}
    if metadata is not None:
        payload["metadata"] = metadata
    return payload


def curve_payload(curve: PolylineCurve, metadata: Optional[dict] = None) -> Dict[str, Any]:
    payload = {"dimension": curve.dimension, "vertices": curve.vertices.tolist()}
    if metadata is not None:
        payload["metadata"] = metadata
    return payload


def truncated_payload(T: TruncatedClosedSet) -> Dict[str, Any]:
    payload = set_payload(T.base)
    payload["truncation_radius"] = T.truncation_radius
    payload["contains_origin"] = T.contains_origin
    return payload


def report_payload(report: DisconnectionReport) -> Dict[str, Any]:
    return report.to_payload()


def read_set(path: str) -> Tuple[DiscreteSet, Optional[dict]]:
    """
    Read a set file.

    Args:
        path: JSON file matching DiscreteSetModel

    Returns:
        The set and its metadata (None when absent)

    Raises:
        InvalidInputError: if the file is missing, malformed or not a valid set
    """
    m = load_model(path, DiscreteSetModel)
    return DiscreteSet(m.dimension, m.resolution, np.asarray(m.points, dtype=float)), m.metadata


def read_curve(path: str) -> PolylineCurve:
    """Read a curve file into a polyline."""
    m = load_model(path, CurveModel)
    return PolylineCurve(np.asarray(m.vertices, dtype=float))


def _truncated(m: TruncatedSetModel) -> TruncatedClosedSet:
    base = DiscreteSet(m.dimension, m.resolution, np.asarray(m.points, dtype=float))
    return TruncatedClosedSet(base=base, truncation_radius=m.truncation_radius, contains_origin=m.contains_origin)


def read_truncated(path: str) -> TruncatedClosedSet:
    return _truncated(load_model(path, TruncatedSetModel))


def read_library(path: str) -> TargetLibrary:
    """
    Read a library file and re-check every target.

    Args:
        path: JSON file matching LibraryModel

    Returns:
        TargetLibrary; a target without a spine gets the first axis

    Raises:
        InvalidTargetError: if a target misses the origin or has a bounded component
    """
    m = load_model(path, LibraryModel)
    targets = []
    for t in m.targets:
        T = _truncated(t)
        validate_target(t.name, T)
        segments = [(np.asarray(a, dtype=float), np.asarray(b, dtype=float)) for a, b in (t.segments or [])]
        spine = np.asarray(t.spine if t.spine is not None else [1.0] + [0.0] * (m.dimension - 1))
        targets.append(Target(name=t.name, set=T, segments=segments, spine=spine))
    return TargetLibrary(dimension=m.dimension, truncation_radius=m.truncation_radius, targets=targets)


def read_object(path: str):
    """A curve file (has ``vertices``) or a set file."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise InvalidInputError(f"no such file: {path}")
    except json.JSONDecodeError as e:
        raise InvalidInputError(f"{path} is not valid JSON: {e}")
    if isinstance(raw, dict) and "vertices" in raw:
        return read_curve(path)
    return read_set(path)[0]
