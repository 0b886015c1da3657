"""A finite-length curve through the origin with prescribed tangents there.

H is laid out in blocks of geometrically decreasing scale. Block k traces
target k mod m inside the annulus between INNER_FRACTION*R and R (in block
units) and moves between pieces along the sphere of radius 1.5R, so the
blowup of H at the origin at the block's scale sees that target alone.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from app.config import config
from app.curves import PolylineCurve, arc_length
from app.errors import BudgetExceededError, InvalidInputError
from app.geometry import great_circle_arc, norms
from app.tangents import ConvergenceProfile, ScaleSchedule, approximates_tangent
from app.tools.library import Target, TargetLibrary

logger = logging.getLogger(__name__)

CONNECTOR = 1.5


@dataclass
class HCurve:
    curve: PolylineCurve
    library: TargetLibrary
    depth: int
    sigma: float
    block_scales: List[float]
    budget: float
    # First vertex, on the boundary of the unit cube
    anchor: np.ndarray = field(repr=False)

    def schedule_for(self, j: int) -> ScaleSchedule:
        m = len(self.library)
        scales = tuple(s for k, s in enumerate(self.block_scales) if k % m == j)
        return ScaleSchedule(scales, law=f"block scales for target {j} (ratio 1/{config.BLOCK_RATIO:g})")

    def certify(self, tol: Optional[float] = None) -> Dict[str, ConvergenceProfile]:
        """Tangent profile at the origin for every target."""
        R = self.library.truncation_radius
        tol = config.H_TOL * R if tol is None else tol
        origin = np.zeros(self.library.dimension)
        return {
            t.name: approximates_tangent(self.curve, origin, self.schedule_for(j), t.set, tol)
            for j, t in enumerate(self.library.targets)
        }


def _pieces(target: Target, R: float) -> List[np.ndarray]:
    """Target segments clipped to the annulus, each as (outer end, inner end)."""
    inner = config.INNER_FRACTION * R
    pieces = []
    for a, b in target.segments:
        ab = b - a
        length = float(norms(ab))
        if length == 0.0:
            continue
        u = ab / length
        # Parameters along the segment where it enters and leaves the inner ball
        p = float(np.dot(u, a))
        disc = p * p - (float(np.dot(a, a)) - inner * inner)
        if disc > 0:
            lo, hi = -p - math.sqrt(disc), -p + math.sqrt(disc)
            parts = [(0.0, min(lo, length)), (max(hi, 0.0), length)]
        else:
            parts = [(0.0, length)]
        for s, t in parts:
            if t - s <= 1e-12 * R:
                continue
            e0, e1 = a + s * u, a + t * u
            outer, inner_end = (e0, e1) if norms(e0) >= norms(e1) else (e1, e0)
            pieces.append(np.vstack([outer, inner_end]))
    return pieces


def _is_spine(piece: np.ndarray, spine: np.ndarray) -> bool:
    outer, inner_end = piece
    direction = (outer - inner_end) / float(norms(outer - inner_end))
    return float(np.dot(direction, spine)) > 1 - 1e-9 and float(norms(inner_end - np.dot(inner_end, spine) * spine)) < 1e-9


def _sphere_point(v: np.ndarray, radius: float) -> np.ndarray:
    return radius * v / float(norms(v))


def _block(target: Target, R: float, last: bool, next_start: Optional[np.ndarray]) -> List[np.ndarray]:
    """Vertices of one block in block units, starting on the connector sphere."""
    pieces = _pieces(target, R)
    spine = [p for p in pieces if _is_spine(p, target.spine)]
    if not spine:
        raise InvalidInputError(f"target {target.name!r} has no ray along its spine")
    order = [p for p in pieces if p is not spine[0]] + [spine[0]]
    sphere = CONNECTOR * R
    verts: List[np.ndarray] = []
    for idx, (outer, inner_end) in enumerate(order):
        top = _sphere_point(outer, sphere)
        if verts:
            verts.extend(great_circle_arc(np.zeros_like(top), verts[-1], top, 1e-3 * R)[1:])
        else:
            verts.append(top)
        verts.append(outer)
        if idx < len(order) - 1:
            verts.extend([inner_end, outer, top])
    if last:
        verts.append(np.zeros_like(verts[0]))
    else:
        # Descend the spine to the next block's connector sphere and move along it
        floor = sphere / config.BLOCK_RATIO
        low = floor * target.spine
        verts.extend(great_circle_arc(np.zeros_like(low), low, next_start, 1e-3 * R / config.BLOCK_RATIO))
    return verts


def _start_direction(target: Target, R: float) -> np.ndarray:
    pieces = _pieces(target, R)
    spine = [p for p in pieces if _is_spine(p, target.spine)]
    first = next((p for p in pieces if spine and p is not spine[0]), pieces[0])
    return first[0] / float(norms(first[0]))


def block_length_bound(target: Target, R: float) -> float:
    """Length of a block in block units is at most this."""
    pieces = _pieces(target, R)
    traced = sum(2 * float(norms(p[0] - p[1])) for p in pieces)
    return traced + len(pieces) * (R + CONNECTOR * math.pi * R) + 3 * R


def build_H(d: int, lib: TargetLibrary, depth: int) -> HCurve:
    """
    Curve in [-1, 1]^d ending at the origin whose blowups cycle through the library.

    Args:
        d: Dimension, equal to the library's
        lib: Targets to embed
        depth: Number of blocks; at least len(lib)

    Returns:
        HCurve with its block scales and length budget
    """
    m = len(lib)
    if depth < m:
        raise InvalidInputError(f"depth {depth} cannot cover {m} targets")
    if d != lib.dimension:
        raise InvalidInputError(f"library lives in R^{lib.dimension}, not R^{d}")
    R = lib.truncation_radius
    sigma = 1.0 / (CONNECTOR * R)
    scales = [sigma * config.BLOCK_RATIO ** -k for k in range(depth)]
    targets = [lib.targets[k % m] for k in range(depth)]
    starts = [_start_direction(t, R) for t in targets]

    first = starts[0]
    anchor = first / float(np.max(np.abs(first)))
    vertices = [anchor]
    for k, (target, scale) in enumerate(zip(targets, scales)):
        last = k == depth - 1
        nxt = None if last else _sphere_point(starts[k + 1], CONNECTOR * R) / config.BLOCK_RATIO
        vertices.extend(scale * v for v in _block(target, R, last, nxt))
    curve = PolylineCurve.through(np.vstack(vertices))

    whisker = float(norms(anchor)) - 1.0
    budget = whisker + sum(s * block_length_bound(t, R) for s, t in zip(scales, targets))
    length = arc_length(curve)
    if length > budget:
        raise BudgetExceededError(f"H length {length:.6g} exceeds its construction budget {budget:.6g}",
                                  spent=length, budget=budget)
    logger.info(f"H with {depth} blocks over {m} targets: {len(curve)} vertices, length {length:.6g} <= {budget:.6g}")
    return HCurve(curve=curve, library=lib, depth=depth, sigma=sigma,
                  block_scales=scales, budget=budget, anchor=anchor)
