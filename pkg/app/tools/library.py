"""Finite libraries of target sets for the tangent constructions.

Every target is a closed set through the origin whose components all reach
the truncation sphere, drawn in the first two coordinates and sampled as a
net. Targets keep their segments too, so H can trace them.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from app.errors import InvalidInputError, InvalidTargetError
from app.tangents import TruncatedClosedSet, unbounded_components_check

logger = logging.getLogger(__name__)

NET_STEP = 0.005

Segment = Tuple[np.ndarray, np.ndarray]


@dataclass(frozen=True)
class Target:
    name: str
    set: TruncatedClosedSet
    segments: List[Segment] = field(repr=False)
    # Unit direction of a ray of the target starting at the origin
    spine: np.ndarray = field(repr=False)


@dataclass
class TargetLibrary:
    dimension: int
    truncation_radius: float
    targets: List[Target]

    def __post_init__(self):
        names = [t.name for t in self.targets]
        if len(set(names)) != len(names):
            raise InvalidInputError(f"duplicate target names in {names}")

    def __len__(self) -> int:
        return len(self.targets)

    @property
    def names(self) -> List[str]:
        return [t.name for t in self.targets]

    def get(self, name: str) -> Target:
        for t in self.targets:
            if t.name == name:
                return t
        raise InvalidInputError(f"unknown target {name!r}; library has {self.names}")


def _unit(theta: float) -> np.ndarray:
    return np.array([math.cos(theta), math.sin(theta)])


def _ray(theta: float, R: float) -> Segment:
    return np.zeros(2), R * _unit(theta)


def _line(theta: float, R: float) -> List[Segment]:
    return [_ray(theta, R), _ray(theta + math.pi, R)]


def _family(k: int, R: float) -> Tuple[str, List[Segment], float]:
    """The k-th canonical target as (name, planar segments, spine angle)."""
    if k == 0:
        return "line", _line(0.0, R), 0.0
    if k == 1:
        return "cross", _line(0.0, R) + _line(math.pi / 2, R), 0.0
    if k == 2:
        return "star-3", [_ray(2 * math.pi * i / 3, R) for i in range(3)], 0.0
    if k == 3:
        half = R * math.sqrt(3.0) / 2
        offset = (np.array([-half, R / 2]), np.array([half, R / 2]))
        return "parallel-pair", _line(0.0, R) + [offset], 0.0
    if k == 4:
        height = R * math.sqrt(3.0) / 2
        teeth = [(np.array([x, 0.0]), np.array([x, height])) for x in (-R / 2, R / 2)]
        return "comb", _line(0.0, R) + teeth, 0.0
    theta = math.pi / (k - 3)
    return f"line-{k - 3}", _line(theta, R), theta


def _embed(v: np.ndarray, d: int) -> np.ndarray:
    out = np.zeros(d)
    out[:2] = v
    return out


def sample_segments(segments: List[Segment], step: float) -> np.ndarray:
    chunks = []
    for a, b in segments:
        count = max(2, int(math.ceil(np.linalg.norm(b - a) / step)) + 1)
        chunks.append(a + np.linspace(0.0, 1.0, count)[:, None] * (b - a))
    return np.vstack(chunks)


def make_target(name: str, segments: List[Segment], spine: np.ndarray, R: float) -> Target:
    """
    Sample the segments as a net and check the target is admissible.

    Args:
        name: Library name of the target
        segments: Segments whose union is the target
        spine: Unit direction of the ray H descends along to the next block
        R: Truncation radius

    Returns:
        Target holding the truncated net

    Raises:
        InvalidTargetError: if the net misses the origin or has a bounded component
    """
    step = NET_STEP * R
    T = TruncatedClosedSet.truncating(sample_segments(segments, step), step, R)
    validate_target(name, T)
    return Target(name=name, set=T, segments=segments, spine=spine)


def validate_target(name: str, T: TruncatedClosedSet) -> None:
    if not T.contains_origin:
        raise InvalidTargetError(f"target {name!r} misses the origin")
    if not unbounded_components_check(T):
        raise InvalidTargetError(f"target {name!r} has a component that stays inside the truncation ball")


def target_library(d: int, R: float, m: int) -> TargetLibrary:
    """
    The first m canonical targets in R^d, truncated at radius R.

    Args:
        d: Dimension, at least 2
        R: Truncation radius
        m: Number of targets

    Returns:
        TargetLibrary in canonical order
    """
    if m < 1:
        raise InvalidInputError(f"a library needs m >= 1 targets, got {m}")
    if d < 2:
        raise InvalidInputError(f"targets live in dimension >= 2, got {d}")
    if not R > 0:
        raise InvalidInputError("truncation radius must be positive")
    targets = []
    for k in range(m):
        name, planar, spine_angle = _family(k, R)
        segments = [(_embed(a, d), _embed(b, d)) for a, b in planar]
        targets.append(make_target(name, segments, _embed(_unit(spine_angle), d), R))
    logger.info(f"target library in R^{d}, radius {R:g}: {', '.join(t.name for t in targets)}")
    return TargetLibrary(dimension=d, truncation_radius=float(R), targets=targets)


def library_payload(lib: TargetLibrary) -> Dict:
    return {
        "dimension": lib.dimension,
        "truncation_radius": lib.truncation_radius,
        "targets": [
            {
                "name": t.name,
                "dimension": t.set.dimension,
                "resolution": t.set.base.resolution,
                "points": t.set.base.points.tolist(),
                "truncation_radius": t.set.truncation_radius,
                "contains_origin": t.set.contains_origin,
                "segments": [[a.tolist(), b.tolist()] for a, b in t.segments],
                "spine": t.spine.tolist(),
            }
            for t in lib.targets
        ],
    }
