"""Points, finite set approximations and the metric primitives.

A ``DiscreteSet`` is a finite epsilon-net standing in for a compact subset of
R^d. Every metric here (excess, truncated excess, Attouch-Wets discrepancy)
is evaluated on such nets.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from app.config import config
from app.errors import DimensionMismatchError, EmptySetError, InvalidInputError

logger = logging.getLogger(__name__)


def norms(diff: np.ndarray) -> np.ndarray:
    """Euclidean norms along the last axis.

    Coordinates are accumulated one at a time so that the result for a
    given difference vector does not depend on the shape of the batch it
    arrives in.
    """
    diff = np.asarray(diff, dtype=float)
    sq = diff[..., 0] * diff[..., 0]
    for k in range(1, diff.shape[-1]):
        sq = sq + diff[..., k] * diff[..., k]
    return np.sqrt(sq)


def as_point(x: Sequence[float], dimension: Optional[int] = None) -> np.ndarray:
    """Validate and convert a EuclideanPoint."""
    p = np.asarray(x, dtype=float).reshape(-1)
    if p.size < 1:
        raise InvalidInputError("a point needs at least one coordinate")
    if not np.all(np.isfinite(p)):
        raise InvalidInputError(f"non-finite coordinates in point {p.tolist()}")
    if dimension is not None and p.size != dimension:
        raise DimensionMismatchError(f"point has dimension {p.size}, expected {dimension}")
    return p


def dedup_points(points: np.ndarray, tol: float) -> np.ndarray:
    """Drop points lying within ``tol`` of an earlier kept point (order preserving)."""
    if len(points) < 2 or tol <= 0:
        return points
    tree = cKDTree(points)
    removed = np.zeros(len(points), dtype=bool)
    for i, neighbours in enumerate(tree.query_ball_point(points, r=tol)):
        if removed[i]:
            continue
        for j in neighbours:
            if j > i:
                removed[j] = True
    if removed.any():
        logger.debug(f"dedup merged {int(removed.sum())} points at tolerance {tol:g}")
    return points[~removed]


@dataclass(frozen=True)
class DiscreteSet:
    """Finite net with recorded resolution epsilon."""
    dimension: int
    resolution: float
    points: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.dimension < 1:
            raise InvalidInputError(f"dimension must be >= 1, got {self.dimension}")
        if not (self.resolution > 0 and math.isfinite(self.resolution)):
            raise InvalidInputError(f"resolution must be positive, got {self.resolution}")
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1 and pts.size == 0:
            pts = pts.reshape(0, self.dimension)
        if pts.ndim != 2 or len(pts) == 0:
            raise EmptySetError("a DiscreteSet needs at least one point")
        if pts.shape[1] != self.dimension:
            raise DimensionMismatchError(
                f"points have dimension {pts.shape[1]}, declared {self.dimension}"
            )
        if not np.all(np.isfinite(pts)):
            raise InvalidInputError("non-finite coordinates in DiscreteSet")
        pts = dedup_points(pts, self.resolution * config.DEDUP_FRACTION)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_points(cls, points, resolution: float) -> "DiscreteSet":
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return cls(dimension=pts.shape[1], resolution=float(resolution), points=pts)

    def __len__(self) -> int:
        return len(self.points)

    def distance_to(self, x: np.ndarray) -> float:
        """dist(x, points)."""
        x = as_point(x, self.dimension)
        return float(norms(self.points - x).min())

    def contains(self, x: np.ndarray, tol: Optional[float] = None) -> bool:
        return self.distance_to(x) <= (self.resolution if tol is None else tol)


def _check_pair(A: np.ndarray, B: np.ndarray) -> None:
    if A.ndim != 2 or B.ndim != 2:
        raise InvalidInputError("point arrays must be two dimensional")
    if A.shape[1] != B.shape[1]:
        raise DimensionMismatchError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    if len(B) == 0:
        raise EmptySetError("excess over an empty set is undefined")


def _points(S) -> np.ndarray:
    return S.points if isinstance(S, DiscreteSet) else np.atleast_2d(np.asarray(S, dtype=float))


def excess_reference(A, B, chunk: int = 512) -> float:
    """Brute-force O(|A||B|) excess: max over a of min over b of |a - b|."""
    A, B = _points(A), _points(B)
    _check_pair(A, B)
    if len(A) == 0:
        raise EmptySetError("excess of an empty set is undefined")
    worst = 0.0
    for start in range(0, len(A), chunk):
        block = A[start:start + chunk]
        d = norms(block[:, None, :] - B[None, :, :]).min(axis=1)
        worst = max(worst, float(d.max()))
    return worst


def excess(A, B) -> float:
    """Excess of A over B, accelerated with a k-d tree.

    The tree only proposes candidates; the distances that count are
    recomputed with the same formula as ``excess_reference``, so both
    agree bit for bit.
    """
    A, B = _points(A), _points(B)
    _check_pair(A, B)
    if len(A) == 0:
        raise EmptySetError("excess of an empty set is undefined")
    if len(A) * len(B) <= 4096:
        return excess_reference(A, B)
    tree = cKDTree(B)
    approx, _ = tree.query(A)
    radii = approx * (1.0 + 1e-9) + 1e-300
    worst = 0.0
    for a, r, cand in zip(A, radii, tree.query_ball_point(A, r=radii)):
        if not cand:
            cand = [int(tree.query(a)[1])]
        d = float(norms(B[cand] - a).min())
        if d > worst:
            worst = d
    return worst


def truncate(A, r: float) -> np.ndarray:
    """Points of A in the closed ball of radius r about the origin."""
    if not r > 0:
        raise InvalidInputError(f"truncation radius must be positive, got {r}")
    pts = _points(A)
    return pts[norms(pts) <= r]


def truncated_excess(A, B, r: float) -> float:
    """exc(A cap closed ball(0, r), B); 0 when the truncation is empty."""
    pa, pb = _points(A), _points(B)
    _check_pair(pa, pb)
    kept = truncate(pa, r)
    if len(kept) == 0:
        return 0.0
    return excess(kept, pb)


def aw_discrepancy(A, B, r: float) -> float:
    """Symmetric truncated excess at radius r."""
    return max(truncated_excess(A, B, r), truncated_excess(B, A, r))


def hausdorff_distance(A, B) -> float:
    """
    Hausdorff distance between two finite point sets.

    Args:
        A: DiscreteSet or (n, d) array
        B: DiscreteSet or (m, d) array in the same dimension

    Returns:
        The larger of the two excesses
    """
    return max(excess(A, B), excess(B, A))


def translate_scale(A: DiscreteSet, x, r: float) -> DiscreteSet:
    """The set (A - x) / r with resolution epsilon / r."""
    if not r > 0:
        raise InvalidInputError(f"scale must be positive, got {r}")
    x = as_point(x, A.dimension)
    return DiscreteSet(A.dimension, A.resolution / r, (A.points - x) / r)


def great_circle_arc(center, a, b, max_sagitta: float) -> np.ndarray:
    """Sample the shorter great-circle arc from a to b on the sphere about center.

    The arc lies in the 2-plane spanned by a - center and b - center. For
    antipodal pairs the plane contains the coordinate axis of smallest index
    that is not parallel to a - center. Consecutive samples deviate from the
    true arc by at most ``max_sagitta``; the endpoints are a and b exactly.
    """
    center, a, b = (np.asarray(v, dtype=float) for v in (center, a, b))
    ua, ub = a - center, b - center
    rho = float(norms(ua))
    if rho == 0:
        raise InvalidInputError("arc endpoints coincide with the sphere center")
    u = ua / rho
    v = ub / float(norms(ub))
    cos_t = float(np.clip(np.dot(u, v), -1.0, 1.0))
    theta = math.acos(cos_t)
    if theta == 0.0:
        return np.vstack([a, b])
    w = v - cos_t * u
    wn = float(norms(w))
    if wn < 1e-12:
        for k in range(len(u)):
            axis = np.zeros_like(u)
            axis[k] = 1.0
            if abs(u[k]) < 0.9:
                w = axis - np.dot(axis, u) * u
                wn = float(norms(w))
                break
    w = w / wn
    if max_sagitta >= rho:
        step = math.pi / 2
    else:
        step = 2.0 * math.acos(1.0 - max_sagitta / rho)
    count = max(2, int(math.ceil(theta / step)) + 1)
    phis = np.linspace(0.0, theta, count)
    arc = center + rho * (np.cos(phis)[:, None] * u + np.sin(phis)[:, None] * w)
    arc[0] = a
    arc[-1] = b
    return arc
