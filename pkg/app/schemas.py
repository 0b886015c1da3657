"""Wire models for the JSON files the CLI reads and writes."""
import math
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


def _finite(points: List[List[float]]) -> List[List[float]]:
    for p in points:
        if not all(math.isfinite(v) for v in p):
            raise ValueError("non-finite coordinate")
    return points


class DiscreteSetModel(BaseModel):
    """DiscreteSet payload."""
    dimension: int
    resolution: float
    points: List[List[float]]
    # Example metadata (dimensions, covering lengths) rides along
    metadata: Optional[Dict[str, Any]] = None

    @field_validator("dimension")
    @classmethod
    def _dimension(cls, v):
        if v < 1:
            raise ValueError("dimension must be >= 1")
        return v

    @field_validator("resolution")
    @classmethod
    def _resolution(cls, v):
        if not (v > 0 and math.isfinite(v)):
            raise ValueError("resolution must be positive")
        return v

    @model_validator(mode="after")
    def _shape(self):
        if not self.points:
            raise ValueError("points must be nonempty")
        if any(len(p) != self.dimension for p in self.points):
            raise ValueError("every point must have `dimension` coordinates")
        _finite(self.points)
        return self


class TruncatedSetModel(DiscreteSetModel):
    truncation_radius: float
    contains_origin: bool
    name: Optional[str] = None
    # Library targets also carry their segments and spine direction
    segments: Optional[List[List[List[float]]]] = None
    spine: Optional[List[float]] = None


class CurveModel(BaseModel):
    """PolylineCurve payload."""
    dimension: int
    vertices: List[List[float]]
    metadata: Optional[Dict[str, Any]] = None

    @model_validator(mode="after")
    def _shape(self):
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if len(self.vertices) < 2:
            raise ValueError("a curve needs at least two vertices")
        if any(len(v) != self.dimension for v in self.vertices):
            raise ValueError("every vertex must have `dimension` coordinates")
        _finite(self.vertices)
        return self


class LibraryModel(BaseModel):
    dimension: int
    truncation_radius: float
    targets: List[TruncatedSetModel]

    @model_validator(mode="after")
    def _names(self):
        names = [t.name for t in self.targets]
        if not self.targets:
            raise ValueError("a library needs at least one target")
        if any(n is None for n in names) or len(set(names)) != len(names):
            raise ValueError("targets need unique names")
        return self


class ReportModel(BaseModel):
    """DisconnectionReport payload."""
    model_config = ConfigDict(populate_by_name=True)

    lambda_: float = Field(alias="lambda")
    witness: List[List[float]]
    pairs: int


class RunManifest(BaseModel):
    command: str
    inputs: List[str]
    parameters: Dict[str, Any]
    outputs: List[str]
    status: int
    wall_time: float

    @field_validator("status")
    @classmethod
    def _status(cls, v):
        if v not in (0, 1, 2):
            raise ValueError("status must be 0, 1 or 2")
        return v
