"""Polyline Lipschitz curves.

A ``PolylineCurve`` is parametrized at constant speed on [0, 1], so its
Lipschitz constant is its total length. Captures of finite nets, density-1
parameters, gap intervals and limits of curve sequences all live here.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy.sparse.csgraph import depth_first_order
from scipy.spatial import cKDTree

from app.disconnect import _tree_matrix, minimum_spanning_tree
from app.errors import (
    DegenerateCurveError,
    DimensionMismatchError,
    EmptySetError,
    InvalidInputError,
    NoGapError,
    NonCauchyError,
    OffSetPointError,
    SemicontinuityError,
)
from app.geometry import DiscreteSet, as_point, hausdorff_distance, norms

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PolylineCurve:
    vertices: np.ndarray = field(repr=False)
    segment_lengths: np.ndarray = field(init=False, repr=False)
    cumulative: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if len(v) < 2:
            raise DegenerateCurveError("a curve needs at least two vertices")
        if not np.all(np.isfinite(v)):
            raise InvalidInputError("non-finite curve vertex")
        seg = norms(np.diff(v, axis=0))
        if np.any(seg == 0):
            raise DegenerateCurveError("consecutive duplicate vertices")
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        for arr in (v, seg, cum):
            arr.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "segment_lengths", seg)
        object.__setattr__(self, "cumulative", cum)

    @classmethod
    def through(cls, points) -> "PolylineCurve":
        """Build from a vertex list, dropping exact consecutive repeats."""
        v = np.atleast_2d(np.asarray(points, dtype=float))
        if len(v) > 1:
            keep = np.concatenate([[True], np.any(v[1:] != v[:-1], axis=1)])
            v = v[keep]
        return cls(v)

    @property
    def dimension(self) -> int:
        return self.vertices.shape[1]

    @property
    def total_length(self) -> float:
        return float(self.cumulative[-1])

    def __len__(self) -> int:
        return len(self.vertices)


@dataclass(frozen=True)
class CaptureCertificate:
    curve: PolylineCurve
    captured: DiscreteSet
    coverage: float
    parameter_index: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class GapInterval:
    s: float
    t: float
    zeta: float
    jump: float
    distance: float


@dataclass
class CurveLimit:
    limit: PolylineCurve
    gaps: List[float]
    arc_lengths: List[float]
    image_lengths: List[float]
    tail: List[int]
    tail_min: float
    gap_sum: float


def evaluate(curve: PolylineCurve, t: float) -> np.ndarray:
    """Constant-speed point at parameter t."""
    if not 0.0 <= t <= 1.0:
        raise InvalidInputError(f"parameter {t} outside [0, 1]")
    if t == 0.0:
        return curve.vertices[0].copy()
    if t == 1.0:
        return curve.vertices[-1].copy()
    return evaluate_many(curve, np.array([t]))[0]


def evaluate_many(curve: PolylineCurve, ts) -> np.ndarray:
    ts = np.asarray(ts, dtype=float)
    s = ts * curve.total_length
    idx = np.clip(np.searchsorted(curve.cumulative, s, side="right") - 1, 0, len(curve) - 2)
    local = (s - curve.cumulative[idx]) / curve.segment_lengths[idx]
    a = curve.vertices[idx]
    out = a + local[:, None] * (curve.vertices[idx + 1] - a)
    out[ts == 0.0] = curve.vertices[0]
    out[ts == 1.0] = curve.vertices[-1]
    return out


def arc_length(curve: PolylineCurve) -> float:
    """Parametrized length; equals H^1 of the image for injective curves."""
    return curve.total_length


def segment_distances(curve: PolylineCurve, p, segments: Optional[np.ndarray] = None):
    """Distance from p to each segment and the global parameter of the closest point."""
    p = np.asarray(p, dtype=float)
    idx = np.arange(len(curve) - 1) if segments is None else np.asarray(segments, dtype=int)
    a = curve.vertices[idx]
    ab = curve.vertices[idx + 1] - a
    length = curve.segment_lengths[idx]
    u = np.clip(np.einsum("ij,ij->i", p - a, ab) / (length * length), 0.0, 1.0)
    d = norms(p - (a + u[:, None] * ab))
    params = (curve.cumulative[idx] + u * length) / curve.total_length
    return d, params


def point_curve_distance(curve: PolylineCurve, points, segments: Optional[np.ndarray] = None):
    """For each point, the distance to the curve and a parameter attaining it."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != curve.dimension:
        raise DimensionMismatchError("points and curve differ in dimension")
    dist = np.empty(len(pts))
    par = np.empty(len(pts))
    for k, p in enumerate(pts):
        d, params = segment_distances(curve, p, segments)
        j = int(np.argmin(d))
        dist[k], par[k] = d[j], params[j]
    return dist, par


def preimages(curve: PolylineCurve, p, tol: float) -> np.ndarray:
    """Sorted parameters where the curve passes within tol of p (one per segment)."""
    d, params = segment_distances(curve, as_point(p, curve.dimension))
    hits = np.sort(params[d <= tol])
    if len(hits) == 0:
        return hits
    keep = np.concatenate([[True], np.diff(hits) > 1e-12])
    return hits[keep]


def _ball_intervals(curve: PolylineCurve, center, radius: float):
    """Per segment, the arc-length interval [u0, u1] lying in the closed ball."""
    a = curve.vertices[:-1]
    length = curve.segment_lengths
    direction = (curve.vertices[1:] - a) / length[:, None]
    rel = a - np.asarray(center, dtype=float)
    b = np.einsum("ij,ij->i", direction, rel)
    c = np.einsum("ij,ij->i", rel, rel) - radius * radius
    disc = b * b - c
    hit = disc >= 0
    root = np.sqrt(np.where(hit, disc, 0.0))
    u0 = np.maximum(-b - root, 0.0)
    u1 = np.minimum(-b + root, length)
    hit &= u1 >= u0
    return np.nonzero(hit)[0], u0, u1


def sample_curve(curve: PolylineCurve, step: float, center=None, radius: Optional[float] = None) -> DiscreteSet:
    """Sample the curve (or its part inside a closed ball) at arc-length step.

    The sample is a DiscreteSet of resolution ``step``: every point of the
    sampled part lies within step/2 of a sample.
    """
    if not step > 0:
        raise InvalidInputError("sampling step must be positive")
    chunks = []
    if center is None:
        segs = range(len(curve) - 1)
        bounds = [(0.0, float(l)) for l in curve.segment_lengths]
    else:
        hit, u0, u1 = _ball_intervals(curve, center, radius)
        segs = hit
        bounds = [(float(u0[i]), float(u1[i])) for i in range(len(curve) - 1)]
    for i in segs:
        lo, hi = bounds[i]
        count = max(2, int(math.ceil((hi - lo) / step)) + 1)
        us = np.linspace(lo, hi, count) / curve.segment_lengths[i]
        a = curve.vertices[i]
        chunks.append(a + us[:, None] * (curve.vertices[i + 1] - a))
    if not chunks:
        raise EmptySetError("no part of the curve lies in the sampling ball")
    return DiscreteSet(curve.dimension, step, np.vstack(chunks))


def local_mass_ratio(curve: PolylineCurve, p, rho: float) -> float:
    """H^1(curve cap B(p, rho)) / (2 rho), counting retraced pieces once per pass."""
    hit, u0, u1 = _ball_intervals(curve, p, rho)
    return float(np.sum(u1[hit] - u0[hit]) / (2.0 * rho))


def image_length(curve: PolylineCurve) -> float:
    """H^1 of the image: collinear overlapping segments are merged before summing."""
    a = curve.vertices[:-1]
    b = curve.vertices[1:]
    u = (b - a) / curve.segment_lengths[:, None]
    lead = np.argmax(np.abs(u) > 1e-12, axis=1)
    sign = np.sign(u[np.arange(len(u)), lead])
    u = u * sign[:, None]
    ta = np.einsum("ij,ij->i", a, u)
    tb = np.einsum("ij,ij->i", b, u)
    offset = a - ta[:, None] * u
    keys = np.round(np.hstack([u, offset]), 12)
    groups = {}
    for key, lo, hi in zip(map(tuple, keys), np.minimum(ta, tb), np.maximum(ta, tb)):
        groups.setdefault(key, []).append((lo, hi))
    total = 0.0
    for intervals in groups.values():
        intervals.sort()
        cur_lo, cur_hi = intervals[0]
        for lo, hi in intervals[1:]:
            if lo <= cur_hi + 1e-12:
                cur_hi = max(cur_hi, hi)
            else:
                total += cur_hi - cur_lo
                cur_lo, cur_hi = lo, hi
        total += cur_hi - cur_lo
    return float(total)


def certify_capture(curve: PolylineCurve, K: DiscreteSet) -> CaptureCertificate:
    dist, params = point_curve_distance(curve, K.points)
    coverage = float(dist.max())
    if coverage > K.resolution:
        raise InvalidInputError(f"curve misses the set by {coverage:.3g} > epsilon {K.resolution:g}")
    return CaptureCertificate(curve=curve, captured=K, coverage=coverage, parameter_index=params)


def base_capture(K: DiscreteSet) -> CaptureCertificate:
    """Shortcut depth-first walk of the MST; length at most twice the MST weight."""
    if len(K) < 2:
        raise InvalidInputError("need ≥ 2 points for a capture")
    i, j, w = minimum_spanning_tree(K.points)
    tree = _tree_matrix(len(K), i, j, w)
    order = depth_first_order(tree, 0, directed=False, return_predecessors=False)
    curve = PolylineCurve(K.points[order])
    params = np.empty(len(K))
    params[order] = curve.cumulative / curve.total_length
    params[order[-1]] = 1.0
    logger.info(f"base capture of {len(K)} points, length {curve.total_length:.6g} (MST {w.sum():.6g})")
    return CaptureCertificate(curve=curve, captured=K, coverage=0.0, parameter_index=params)


def density_one_parameter(curve: PolylineCurve, t: float) -> float:
    """Move t to a parameter whose point has an isolated straight neighbourhood.

    The returned point sits on one segment at least a tenth of its length from
    both ends, and no other segment comes within a twentieth of that length,
    so the local mass ratio in that window is exactly 1.
    """
    if not 0.0 < t < 1.0:
        raise InvalidInputError(f"parameter {t} must lie in (0, 1)")
    s = t * curve.total_length
    i = int(np.clip(np.searchsorted(curve.cumulative, s, side="right") - 1, 0, len(curve) - 2))
    length = float(curve.segment_lengths[i])
    margin = length / 10.0
    rho = length / 20.0
    u0 = s - curve.cumulative[i]
    others = np.array([k for k in range(len(curve) - 1) if k != i], dtype=int)
    grid = np.linspace(margin, length - margin, 81)
    candidates = sorted(grid, key=lambda u: abs(u - u0))
    if margin <= u0 <= length - margin:
        candidates.insert(0, u0)
    a = curve.vertices[i]
    direction = (curve.vertices[i + 1] - a) / length
    for u in candidates:
        if len(others):
            d, _ = segment_distances(curve, a + u * direction, others)
            if d.min() < rho:
                continue
        if u == u0:
            return t
        return float((curve.cumulative[i] + u) / curve.total_length)
    raise DegenerateCurveError(f"no isolated interior parameter on segment {i}")


def gap_interval(g: PolylineCurve, K: DiscreteSet, a: float, b: float, lam: float) -> GapInterval:
    """A complementary interval of g^{-1}(K) between a and b with a large jump.

    Passes of g near K points split [min(a,b), max(a,b)] into complementary
    intervals. They are searched by decreasing jump |g(s) - g(t)| (near ties
    by smaller s); the first one beating lam*|g(a) - g(b)| that contains a
    density-1 parameter farther than lam*|g(a) - g(b)|/4 from K wins.
    """
    if not (0.0 <= a <= 1.0 and 0.0 <= b <= 1.0):
        raise InvalidInputError("gap endpoints must lie in [0, 1]")
    if g.dimension != K.dimension:
        raise DimensionMismatchError("curve and set differ in dimension")
    eps = K.resolution
    pa, pb = evaluate(g, a), evaluate(g, b)
    if K.distance_to(pa) > eps or K.distance_to(pb) > eps:
        raise OffSetPointError("gap endpoints must map into the set")
    span = float(norms(pa - pb))
    if span == 0.0:
        raise InvalidInputError("gap endpoints map to the same point")
    lo, hi = min(a, b), max(a, b)
    first = int(np.clip(np.searchsorted(g.cumulative, lo * g.total_length, side="right") - 1, 0, len(g) - 2))
    last = int(np.clip(np.searchsorted(g.cumulative, hi * g.total_length, side="left"), 1, len(g) - 1))
    segs = np.arange(first, last)

    passes = [lo, hi]
    for p in K.points:
        d, params = segment_distances(g, p, segs)
        passes.extend(params[(d <= eps) & (params >= lo) & (params <= hi)])
    passes = np.unique(np.asarray(passes))
    passes = passes[np.concatenate([[True], np.diff(passes) > 1e-12])]

    threshold = lam * span
    bound = 0.25 * lam * span
    points = evaluate_many(g, passes)
    jumps = norms(np.diff(points, axis=0))
    candidates = [k for k in range(len(jumps)) if jumps[k] > threshold]
    if not candidates:
        raise NoGapError(f"no complementary interval jumps more than {threshold:.3g}")
    quantum = 1e-9 * max(jumps[k] for k in candidates)
    candidates.sort(key=lambda k: (-round(jumps[k] / quantum), passes[k]))

    tree = cKDTree(K.points)
    lip = g.total_length
    for k in candidates:
        s, t = float(passes[k]), float(passes[k + 1])
        count = int(np.clip(math.ceil((t - s) * lip / (eps / 2.0)), 16, 4096))
        zs = np.linspace(s, t, count + 2)[1:-1]
        dist, _ = tree.query(evaluate_many(g, zs))
        for z in zs[np.argsort(-dist)][:16]:
            try:
                zeta = density_one_parameter(g, float(z))
            except DegenerateCurveError:
                continue
            if not s < zeta < t:
                continue
            far = float(tree.query(evaluate(g, zeta))[0])
            if far > bound:
                logger.debug(f"gap ({s:.6g}, {t:.6g}) jump {jumps[k]:.4g}, zeta {zeta:.6g} at {far:.4g}")
                return GapInterval(s=s, t=t, zeta=zeta, jump=float(jumps[k]), distance=far)
    raise NoGapError(f"no density-1 point farther than {bound:.3g} from the set")


def curve_limit(
    curves: Sequence[PolylineCurve],
    tol: float,
    gap_tol: Optional[float] = None,
    budgets: Optional[Sequence[float]] = None,
) -> CurveLimit:
    """Desk-scale limit of a curve sequence with the Golab length check.

    The final stage is the limit representative. The sequence is Cauchy at
    ``gap_tol`` when the last Hausdorff gap (on samples at step gap_tol/4) is
    at most gap_tol, and the representative must be nondegenerate.

    The tail is every stage within ``gap_tol`` of the limit in Hausdorff
    distance. The image length of the limit may exceed the parametrized
    length of no tail stage, plus the length still allowed after that stage,
    by more than ``tol``.

    Args:
        curves: Stages in construction order.
        tol: Slack of the length check.
        gap_tol: Hausdorff tolerance for the Cauchy check and the tail
            (defaults to ``tol``).
        budgets: ``budgets[k]`` bounds the length added going from stage k
            to stage k + 1. Without it no growth is allowed.

    Returns:
        CurveLimit with the gaps, lengths and the tail bound.
    """
    if len(curves) < 2:
        raise InvalidInputError("curve_limit needs at least two curves")
    if not tol > 0:
        raise InvalidInputError("tolerance must be positive")
    if budgets is None:
        budgets = [0.0] * (len(curves) - 1)
    if len(budgets) != len(curves) - 1 or any(b < 0 for b in budgets):
        raise InvalidInputError(f"need {len(curves) - 1} nonnegative stage budgets, got {list(budgets)}")
    gap_tol = tol if gap_tol is None else gap_tol
    step = gap_tol / 4.0
    samples = [sample_curve(c, step) for c in curves]
    gaps = [hausdorff_distance(s0, s1) for s0, s1 in zip(samples, samples[1:])]
    if gaps[-1] > gap_tol:
        raise NonCauchyError(f"final Hausdorff gap {gaps[-1]:.4g} exceeds {gap_tol:.4g}")
    limit = curves[-1]
    images = [image_length(c) for c in curves]
    if images[-1] <= gap_tol:
        raise DegenerateCurveError("the limit collapses to a point: not a nondegenerate continuum")
    arcs = [arc_length(c) for c in curves]
    allowance = [float(sum(budgets[k:])) for k in range(len(curves))]
    tail = [k for k, s in enumerate(samples) if hausdorff_distance(s, samples[-1]) <= gap_tol]
    k_min = min(tail, key=lambda k: arcs[k] + allowance[k])
    tail_min = arcs[k_min] + allowance[k_min]
    if images[-1] > tail_min + tol:
        raise SemicontinuityError(
            f"limit length {images[-1]:.6g} exceeds stage {k_min} length plus allowance {tail_min:.6g}"
        )
    return CurveLimit(limit=limit, gaps=gaps, arc_lengths=arcs, image_lengths=images,
                      tail=tail, tail_min=tail_min, gap_sum=float(sum(gaps)))
