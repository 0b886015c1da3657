"""Splice scaled copies of H into a capture near a point of the set.

For every approach point y_n the capture is cut open inside a small ball
around a point of a gap far from the set. Strands that merely cross the
ball are rerouted along the sphere; the strand through the ball centre
detours through a scaled copy of H whose origin sits at the centre.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.curves import (
    CaptureCertificate,
    PolylineCurve,
    arc_length,
    certify_capture,
    evaluate,
    gap_interval,
    preimages,
    segment_distances,
)
from app.errors import (
    BudgetExceededError,
    DegenerateSelectionError,
    InvalidInputError,
    OffSetPointError,
)
from app.geometry import DiscreteSet, as_point, great_circle_arc, norms
from app.tools.hcurve import HCurve

logger = logging.getLogger(__name__)


@dataclass
class SpliceRecord:
    site: Tuple[float, ...]
    gap_witness: float
    ball_radius: float
    copy_scale: float
    reroutes: List[dict] = field(default_factory=list)
    length_delta: float = 0.0

    def to_payload(self) -> dict:
        return {
            "site": list(self.site),
            "gap_witness": self.gap_witness,
            "ball_radius": self.ball_radius,
            "copy_scale": self.copy_scale,
            "reroutes": self.reroutes,
            "length_delta": self.length_delta,
        }


@dataclass(frozen=True)
class Candidate:
    index: int
    y: np.ndarray
    site: np.ndarray
    zeta: float
    gap_witness: float


def ball_radius(lam: float, gap: float) -> float:
    return lam * gap / 16.0


def copy_scale(lam: float, gap: float, d: int) -> float:
    return lam * gap / (32.0 * math.sqrt(d))


def select_disjoint_subsequence(x, ys: Sequence, sites: Sequence, lam: float, minimum: int = 2) -> List[int]:
    """Greedy scan keeping an index when its excision ball misses every kept ball."""
    if len(ys) != len(sites):
        raise InvalidInputError(f"{len(ys)} approach points for {len(sites)} sites")
    x = np.asarray(x, dtype=float)
    radii = [ball_radius(lam, float(norms(np.asarray(y, dtype=float) - x))) for y in ys]
    centres = [np.asarray(s, dtype=float) for s in sites]
    kept: List[int] = []
    for n in range(len(ys)):
        if all(float(norms(centres[n] - centres[k])) > radii[n] + radii[k] for k in kept):
            kept.append(n)
        else:
            logger.debug(f"site {n} overlaps a kept excision ball; dropped")
    if len(kept) < minimum:
        raise DegenerateSelectionError(f"only {len(kept)} of {len(ys)} excision balls are pairwise disjoint")
    return kept


def find_candidates(G: CaptureCertificate, K: DiscreteSet, x, ys: Sequence, lam: float) -> List[Candidate]:
    """Gap site for every approach point, between the closest preimages of x and y."""
    g = G.curve
    eps = K.resolution
    pre_x = preimages(g, x, eps)
    if len(pre_x) == 0:
        raise OffSetPointError(f"the capture misses {x.tolist()}")
    out = []
    for n, y in enumerate(ys):
        pre_y = preimages(g, y, eps)
        if len(pre_y) == 0:
            raise OffSetPointError(f"the capture misses {y.tolist()}")
        gaps = np.abs(pre_x[:, None] - pre_y[None, :])
        i, j = np.unravel_index(int(np.argmin(gaps)), gaps.shape)
        gap = gap_interval(g, K, float(pre_x[i]), float(pre_y[j]), lam)
        out.append(Candidate(index=n, y=y, site=evaluate(g, gap.zeta), zeta=gap.zeta,
                             gap_witness=float(norms(x - y))))
    return out


def _strands(curve: PolylineCurve, centre: np.ndarray, radius: float):
    """Maximal runs of the curve inside the ball, as (first seg, u_in, last seg, u_out)."""
    a = curve.vertices[:-1]
    length = curve.segment_lengths
    direction = (curve.vertices[1:] - a) / length[:, None]
    rel = a - centre
    b = np.einsum("ij,ij->i", direction, rel)
    c = np.einsum("ij,ij->i", rel, rel) - radius * radius
    disc = b * b - c
    inside = norms(curve.vertices - centre) < radius
    if inside[0] or inside[-1]:
        raise InvalidInputError("the curve starts or ends inside the excision ball")
    strands = []
    current = None
    for i in range(len(length)):
        if disc[i] <= 0:
            continue
        root = math.sqrt(disc[i])
        u0, u1 = max(-b[i] - root, 0.0), min(-b[i] + root, float(length[i]))
        if u1 <= u0:
            continue
        if current is None:
            current = (i, u0)
        if u1 < float(length[i]) or not inside[i + 1]:
            strands.append((current[0], current[1], i, u1))
            current = None
    return strands


def _point(curve: PolylineCurve, seg: int, u: float) -> np.ndarray:
    a = curve.vertices[seg]
    return a + (u / curve.segment_lengths[seg]) * (curve.vertices[seg + 1] - a)


def _splice_one(curve: PolylineCurve, cand: Candidate, H: HCurve, lam: float, sagitta: float):
    d = curve.dimension
    rho = ball_radius(lam, cand.gap_witness)
    cs = copy_scale(lam, cand.gap_witness, d)
    site = cand.site
    strands = _strands(curve, site, rho)
    if not strands:
        raise InvalidInputError("the site is not on the curve")
    closest = [float(segment_distances(curve, site, np.arange(f, l + 1))[0].min()) for f, _, l, _ in strands]
    through_site = strands[int(np.argmin(closest))][:2]

    copy = cs * H.curve.vertices + site
    door = copy[0]
    outside = site + rho * H.anchor / float(norms(H.anchor))

    pieces = []
    reroutes = []
    cursor = 0
    for first, u_in, last, u_out in strands:
        entry, exit_ = _point(curve, first, u_in), _point(curve, last, u_out)
        removed = (float(curve.segment_lengths[first:last].sum()) - u_in + u_out)
        pieces.append(curve.vertices[cursor:first + 1])
        if (first, u_in) == through_site:
            route = [
                great_circle_arc(site, entry, outside, sagitta),
                door[None, :],
                copy,
                copy[::-1],
                outside[None, :],
                great_circle_arc(site, outside, exit_, sagitta),
            ]
            kind = "copy"
        else:
            route = [great_circle_arc(site, entry, exit_, sagitta)]
            kind = "arc"
        path = np.vstack(route)
        pieces.append(path)
        added = float(norms(np.diff(path, axis=0)).sum())
        reroutes.append({"kind": kind, "entry": entry.tolist(), "exit": exit_.tolist(),
                         "removed": removed, "added": added})
        cursor = last + 1
    pieces.append(curve.vertices[cursor:])
    spliced = PolylineCurve.through(np.vstack(pieces))
    record = SpliceRecord(site=tuple(float(v) for v in site), gap_witness=cand.gap_witness,
                          ball_radius=rho, copy_scale=cs, reroutes=reroutes,
                          length_delta=arc_length(spliced) - arc_length(curve))
    return spliced, record


def splice(
    G: CaptureCertificate,
    K: DiscreteSet,
    x,
    ys: Sequence,
    H: HCurve,
    lam: float,
    delta: float,
    region: Optional[Tuple[np.ndarray, float]] = None,
    avoid: Sequence[Tuple[np.ndarray, float]] = (),
) -> Tuple[CaptureCertificate, List[SpliceRecord]]:
    """Insert a copy of H at a gap site for each approach point y_n.

    ``region`` (centre, radius) keeps only sites whose ball lies inside it, and
    ``avoid`` lists balls the new ones must miss; the pipeline uses both to
    confine each stage.

    Args:
        G: Capture to splice into
        K: The set G captures
        x: Point of K the approach points converge to
        ys: Approach points y_n
        H: Curve whose copies are inserted
        lam: Working disconnectedness constant in (0, 1]
        delta: Length budget for the whole call

    Returns:
        The new capture and one SpliceRecord per inserted copy

    Raises:
        BudgetExceededError: when the added length reaches ``delta``
    """
    if not delta > 0:
        raise InvalidInputError("length budget must be positive")
    if not 0 < lam <= 1:
        raise InvalidInputError(f"lambda must lie in (0, 1], got {lam}")
    d = K.dimension
    x = as_point(x, d)
    if not K.contains(x):
        raise OffSetPointError(f"{x.tolist()} is not a point of the set")
    ys = [as_point(y, d) for y in ys]
    for y in ys:
        if not K.contains(y):
            raise OffSetPointError(f"{y.tolist()} is not a point of the set")
        if float(norms(y - x)) <= K.resolution:
            raise InvalidInputError("approach points must differ from x")
    if not ys:
        raise DegenerateSelectionError("no approach points")

    candidates = find_candidates(G, K, x, ys, lam)
    admissible = []
    for cand in candidates:
        rho = ball_radius(lam, cand.gap_witness)
        if region is not None and float(norms(cand.site - region[0])) + rho >= region[1]:
            logger.debug(f"site {cand.index} leaves the stage ball")
            continue
        if any(float(norms(cand.site - c)) <= rho + r for c, r in avoid):
            logger.debug(f"site {cand.index} meets an earlier excision ball")
            continue
        admissible.append(cand)
    kept = select_disjoint_subsequence(
        x, [c.y for c in admissible], [c.site for c in admissible], lam, minimum=min(2, len(ys))
    )

    curve = G.curve
    sagitta = K.resolution / 4.0
    records = []
    for idx in kept:
        curve, record = _splice_one(curve, admissible[idx], H, lam, sagitta)
        records.append(record)
        logger.info(f"spliced H at {list(record.site)}: ball {record.ball_radius:.4g}, length +{record.length_delta:.4g}")
    spent = sum(r.length_delta for r in records)
    if spent >= delta:
        raise BudgetExceededError(f"splices add {spent:.6g}, budget {delta:.6g}", spent=spent, budget=delta)
    return certify_capture(curve, K), records
