"""Blowups, tangent and pseudotangent convergence checks.

Convergence of blowups in the Attouch-Wets sense is judged at the single
truncation radius carried by the target set. Every operation accepts either
a ``DiscreteSet`` or a ``PolylineCurve``; curves are sampled locally around
the basepoint at a step proportional to the blowup window.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from app.config import config
from app.curves import PolylineCurve, point_curve_distance, sample_curve
from app.errors import (
    DimensionMismatchError,
    EmptySetError,
    InvalidInputError,
    OffSetPointError,
    ScaleResolutionError,
)
from app.geometry import DiscreteSet, as_point, aw_discrepancy, norms, translate_scale

logger = logging.getLogger(__name__)

SetLike = Union[DiscreteSet, PolylineCurve]


@dataclass(frozen=True)
class TruncatedClosedSet:
    base: DiscreteSet
    truncation_radius: float
    contains_origin: bool = True

    def __post_init__(self):
        R = self.truncation_radius
        if not R > 0:
            raise InvalidInputError(f"truncation radius must be positive, got {R}")
        slack = R * 1e-9 + self.base.resolution
        if float(norms(self.base.points).max()) > R + slack:
            raise InvalidInputError("truncated set has points outside the truncation ball")
        if self.contains_origin and self.base.distance_to(np.zeros(self.base.dimension)) > self.base.resolution:
            raise InvalidInputError("set is flagged as containing the origin but misses it")

    @classmethod
    def truncating(cls, points, resolution: float, R: float) -> "TruncatedClosedSet":
        """Truncate raw points to the closed R-ball and detect the origin."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        kept = pts[norms(pts) <= R]
        if len(kept) == 0:
            raise EmptySetError(f"nothing left after truncation at radius {R:g}")
        base = DiscreteSet.from_points(kept, resolution)
        origin = base.distance_to(np.zeros(base.dimension)) <= resolution
        return cls(base=base, truncation_radius=float(R), contains_origin=origin)

    @property
    def dimension(self) -> int:
        return self.base.dimension


@dataclass(frozen=True)
class ScaleSchedule:
    scales: Tuple[float, ...]
    law: str = "explicit"

    def __post_init__(self):
        scales = tuple(float(s) for s in self.scales)
        if not scales:
            raise InvalidInputError("a scale schedule needs at least one scale")
        if any(not s > 0 for s in scales):
            raise InvalidInputError("scales must be positive")
        if any(b >= a for a, b in zip(scales, scales[1:])):
            raise InvalidInputError("scales must be strictly decreasing")
        object.__setattr__(self, "scales", scales)

    @classmethod
    def geometric(cls, start: float, ratio: float, count: int) -> "ScaleSchedule":
        return cls(tuple(start * ratio ** k for k in range(count)), law=f"geometric start={start:g} ratio={ratio:g}")

    def __len__(self) -> int:
        return len(self.scales)


@dataclass(frozen=True)
class ProfileRow:
    scale: float
    basepoint: Tuple[float, ...]
    discrepancy: float
    radius: float


@dataclass
class ConvergenceProfile:
    rows: List[ProfileRow]
    tolerance: float
    verdict: bool = field(init=False)

    def __post_init__(self):
        self.verdict = bool(self.rows) and self.rows[-1].discrepancy <= self.tolerance

    @property
    def discrepancies(self) -> List[float]:
        return [row.discrepancy for row in self.rows]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "scale": [row.scale for row in self.rows],
                "basepoint": [";".join(repr(v) for v in row.basepoint) for row in self.rows],
                "discrepancy": [row.discrepancy for row in self.rows],
                "radius": [row.radius for row in self.rows],
            },
            columns=["scale", "basepoint", "discrepancy", "radius"],
        )


def _dimension(K: SetLike) -> int:
    return K.dimension


def _resolution(K: SetLike) -> float:
    return K.resolution if isinstance(K, DiscreteSet) else 0.0


def _check_on_set(K: SetLike, x: np.ndarray, tol: float) -> None:
    if isinstance(K, DiscreteSet):
        d = K.distance_to(x)
    else:
        d = float(point_curve_distance(K, x)[0][0])
    if d > tol:
        raise OffSetPointError(f"basepoint {x.tolist()} is {d:.3g} from the set (tolerance {tol:g})")


def blowup(K: SetLike, x, r: float, R: float) -> TruncatedClosedSet:
    """The rescaled set (K - x) / r truncated to the closed R-ball."""
    if not (r > 0 and R > 0):
        raise InvalidInputError("scale and radius must be positive")
    x = as_point(x, _dimension(K))
    if isinstance(K, DiscreteSet):
        _check_on_set(K, x, K.resolution)
        scaled = translate_scale(K, x, r)
    else:
        step = config.SAMPLE_FIDELITY * r * R
        _check_on_set(K, x, step)
        window = sample_curve(K, step, center=x, radius=r * R * (1.0 + 1e-9))
        scaled = translate_scale(window, x, r)
    kept = scaled.points[norms(scaled.points) <= R]
    if len(kept) == 0:
        raise ScaleResolutionError(f"blowup at scale {r:g} leaves no point inside radius {R:g}")
    base = DiscreteSet(scaled.dimension, scaled.resolution, kept)
    return TruncatedClosedSet(base=base, truncation_radius=float(R), contains_origin=True)


def _profile(K, pairs, T: TruncatedClosedSet, tol: float) -> ConvergenceProfile:
    R = T.truncation_radius

    def row(pair):
        basepoint, r = pair
        B = blowup(K, basepoint, r, R)
        d = aw_discrepancy(B.base, T.base, R)
        logger.debug(f"scale {r:.4g} at {basepoint.tolist()}: discrepancy {d:.4g}")
        return ProfileRow(scale=r, basepoint=tuple(float(v) for v in basepoint), discrepancy=d, radius=R)

    with ThreadPoolExecutor(max_workers=config.THREADS) as pool:
        rows = list(pool.map(row, pairs))
    profile = ConvergenceProfile(rows=rows, tolerance=tol)
    logger.info(f"profile over {len(rows)} scales: final {rows[-1].discrepancy:.4g}, verdict {profile.verdict}")
    return profile


def _check_target(K: SetLike, s: ScaleSchedule, T: TruncatedClosedSet, tol: float) -> None:
    if not T.contains_origin:
        raise InvalidInputError("the target must contain the origin")
    if T.dimension != _dimension(K):
        raise DimensionMismatchError(f"target has dimension {T.dimension}, set has {_dimension(K)}")
    if not tol > 0:
        raise InvalidInputError("tolerance must be positive")
    eps = _resolution(K)
    if min(s.scales) < eps / T.truncation_radius:
        raise ScaleResolutionError(
            f"scale {min(s.scales):g} magnifies below the data resolution (needs >= {eps / T.truncation_radius:g})"
        )


def approximates_tangent(K: SetLike, x, s: ScaleSchedule, T: TruncatedClosedSet, tol: float) -> ConvergenceProfile:
    """Discrepancy of each blowup of K at x against T; verdict from the last scale."""
    _check_target(K, s, T, tol)
    x = as_point(x, _dimension(K))
    return _profile(K, [(x, r) for r in s.scales], T, tol)


def pseudotangent_witness(
    K: SetLike,
    x,
    basepoints: Sequence,
    s: ScaleSchedule,
    T: TruncatedClosedSet,
    tol: float,
) -> ConvergenceProfile:
    """Like approximates_tangent, but blowing up at moving basepoints converging to x."""
    _check_target(K, s, T, tol)
    d = _dimension(K)
    x = as_point(x, d)
    pts = [as_point(b, d) for b in basepoints]
    if len(pts) != len(s):
        raise InvalidInputError(f"{len(pts)} basepoints for {len(s)} scales")
    eps = _resolution(K)
    for b in pts:
        _check_on_set(K, b, eps if isinstance(K, DiscreteSet) else 1e-9 * (1.0 + float(norms(b))))
    gaps = [float(norms(b - x)) for b in pts]
    if any(later > earlier + 2 * eps + 1e-12 for earlier, later in zip(gaps, gaps[1:])):
        raise InvalidInputError("basepoints do not approach the point")
    return _profile(K, list(zip(pts, s.scales)), T, tol)


def unbounded_components_check(T: TruncatedClosedSet) -> bool:
    """True when every component of the 3-epsilon graph reaches the truncation sphere."""
    eps = T.base.resolution
    link = config.COMPONENT_SLACK * eps
    pts = T.base.points
    n = len(pts)
    pairs = cKDTree(pts).query_pairs(link, output_type="ndarray")
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n)) if len(pairs) else coo_matrix((n, n))
    count, labels = connected_components(graph, directed=False)
    reach = norms(pts)
    far = T.truncation_radius - link
    for c in range(count):
        if reach[labels == c].max() < far:
            logger.debug(f"component {c} of {count} stays inside radius {reach[labels == c].max():.4g}")
            return False
    return True
