"""Recursive construction of a capture with every library target as a pseudotangent.

Stage n takes the n-th point of a farthest-point ordering of the net, picks
approach points inside a ball that avoids the earlier stage points, and
splices copies of H near it. A stage that exceeds its length budget retries
with fewer approach points.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from app.config import config
from app.curves import CaptureCertificate, CurveLimit, arc_length, base_capture, curve_limit
from app.disconnect import estimate_lambda, working_lambda
from app.errors import BudgetExceededError, DegenerateSelectionError, InvalidInputError, VerificationError
from app.geometry import DiscreteSet, as_point, norms
from app.tangents import ScaleSchedule, pseudotangent_witness
from app.tools.hcurve import HCurve, build_H
from app.tools.library import TargetLibrary
from app.tools.splice import SpliceRecord, splice

logger = logging.getLogger(__name__)


@dataclass
class WitnessVerdict:
    stage: int
    point: List[float]
    target: str
    verdict: bool
    discrepancy: float
    scales: List[float]

    def to_payload(self) -> dict:
        return {
            "stage": self.stage,
            "point": self.point,
            "target": self.target,
            "verdict": self.verdict,
            "discrepancy": self.discrepancy,
            "scales": self.scales,
        }


@dataclass
class PipelineState:
    lam: float
    delta: float
    stage: int = 0
    captures: List[CaptureCertificate] = field(default_factory=list)
    points: List[np.ndarray] = field(default_factory=list)
    radii: List[float] = field(default_factory=list)
    budgets: List[float] = field(default_factory=list)
    records: List[List[SpliceRecord]] = field(default_factory=list)
    verdicts: List[WitnessVerdict] = field(default_factory=list)
    limit: Optional[CurveLimit] = None
    failed_stage: Optional[int] = None
    error: Optional[str] = None

    @property
    def spent(self) -> float:
        return float(sum(r.length_delta for stage in self.records for r in stage))

    @property
    def passed(self) -> bool:
        return self.failed_stage is None and bool(self.verdicts) and all(v.verdict for v in self.verdicts)

    def excision_balls(self):
        return [(np.asarray(r.site), r.ball_radius) for stage in self.records for r in stage]

    def to_payload(self) -> Dict:
        base = arc_length(self.captures[0].curve) if self.captures else None
        final = arc_length(self.captures[-1].curve) if self.captures else None
        return {
            "lambda": self.lam,
            "delta": self.delta,
            "stages": [
                {
                    "stage": n + 1,
                    "point": self.points[n].tolist(),
                    "radius": self.radii[n],
                    "budget": self.budgets[n],
                    "splices": [r.to_payload() for r in self.records[n]],
                }
                for n in range(len(self.records))
            ],
            "ledger": {
                "base_length": base,
                "final_length": final,
                "spent": self.spent,
                "budget": self.delta,
            },
            "limit": None if self.limit is None else {
                "gaps": self.limit.gaps,
                "arc_lengths": self.limit.arc_lengths,
                "image_lengths": self.limit.image_lengths,
                "gap_sum": self.limit.gap_sum,
                "tail": self.limit.tail,
                "tail_bound": self.limit.tail_min,
            },
            "witnesses": [v.to_payload() for v in self.verdicts],
            "failed_stage": self.failed_stage,
            "error": self.error,
            "passed": self.passed,
        }


def farthest_point_order(K: DiscreteSet, start: int = 0) -> List[int]:
    """Greedy farthest-point ordering; ties go to the lower index."""
    pts = K.points
    order = [start]
    dist = norms(pts - pts[start])
    for _ in range(len(pts) - 1):
        # distances within a relative 1e-9 of the maximum tie
        nxt = int(np.flatnonzero(dist >= dist.max() * (1.0 - 1e-9))[0])
        order.append(nxt)
        dist = np.minimum(dist, norms(pts - pts[nxt]))
    return order


def select_ys(K: DiscreteSet, x, bound: float, ratio: float = 0.5) -> List[np.ndarray]:
    """
    Net points approaching x at geometrically decaying distances below ``bound``.

    Args:
        K: The set
        x: Point the sequence converges to
        bound: Strict upper bound on |x - y|
        ratio: Each kept distance is at most ratio times the previous one

    Returns:
        Points ordered by decreasing distance to x
    """
    x = as_point(x, K.dimension)
    d = norms(K.points - x)
    idx = [i for i in np.argsort(-d, kind="stable") if K.resolution < d[i] < bound]
    ys, last = [], None
    for i in idx:
        if last is None or d[i] <= ratio * last * (1 + 1e-9):
            ys.append(K.points[i].copy())
            last = d[i]
    return ys


def stage_radius(points: List[np.ndarray], K: DiscreteSet) -> float:
    """Quarter of the distance to the nearest earlier stage point (the set's extent for the first)."""
    x = points[-1]
    if len(points) == 1:
        return 0.25 * float(norms(K.points - x).max())
    return 0.25 * min(float(norms(p - x)) for p in points[:-1])


def _witnesses(state: PipelineState, H: HCurve, lib: TargetLibrary, stage: int, tol: float) -> None:
    curve = state.captures[-1].curve
    records = state.records[stage - 1]
    x = state.points[stage - 1]
    m = len(lib)
    for j, target in enumerate(lib.targets):
        block = H.block_scales[j % m] if j < len(H.block_scales) else H.block_scales[-1]
        scales = [r.copy_scale * block for r in records]
        profile = pseudotangent_witness(
            curve, x, [np.asarray(r.site) for r in records], ScaleSchedule(tuple(scales), law="copy scale x block scale"),
            target.set, tol,
        )
        state.verdicts.append(WitnessVerdict(
            stage=stage, point=x.tolist(), target=target.name, verdict=profile.verdict,
            discrepancy=profile.rows[-1].discrepancy, scales=scales,
        ))
        level = logging.INFO if profile.verdict else logging.WARNING
        logger.log(level, f"stage {stage} witness for {target.name}: {profile.rows[-1].discrepancy:.4g} (tol {tol:g})")


def run_stage(state: PipelineState, K: DiscreteSet, H: HCurve, lam: float, stage: int, x: np.ndarray, radius: float):
    """
    Splice one stage around x inside B(x, radius), dropping the farthest
    approach point while the stage overruns its budget delta * 2^-stage.

    Returns:
        (capture, records) from splice, and the stage budget
    """
    budget = state.delta * 2.0 ** -stage
    ys = select_ys(K, x, radius / (1.0 + lam / 16.0))
    G = state.captures[-1]
    while True:
        try:
            return splice(G, K, x, ys, H, lam, budget, region=(x, radius), avoid=state.excision_balls()), budget
        except BudgetExceededError as e:
            if len(ys) <= 2:
                raise BudgetExceededError(f"stage {stage}: {e}", stage=stage, spent=e.spent, budget=budget)
            logger.warning(f"stage {stage} over budget ({e.spent:.4g} >= {budget:.4g}); dropping the farthest approach point")
            ys = ys[1:]


def theorem_pipeline(
    K: DiscreteSet,
    stages: int,
    delta: float,
    lib: TargetLibrary,
    lam: Optional[float] = None,
    h_depth: Optional[int] = None,
    limit_tol: float = 1e-6,
):
    """Run the stages and verify the witnesses and the final limit.

    Args:
        K: The set
        stages: Number of stages
        delta: Total length budget; stage n may add delta * 2^-n
        lib: Targets every stage point must see
        lam: Working lambda; estimated from K when omitted
        h_depth: Blocks in H; defaults from the library size
        limit_tol: Tolerance of the limit length check

    Returns the final capture and the state. A stage that cannot stay in its
    budget raises BudgetExceededError carrying the stage number, with the
    partial state attached as ``e.state``.
    """
    if stages < 1:
        raise InvalidInputError(f"stages must be >= 1, got {stages}")
    if not delta > 0:
        raise InvalidInputError("delta must be positive")
    if stages > len(K):
        raise InvalidInputError(f"{stages} stages need as many distinct points, the net has {len(K)}")
    if lam is None:
        lam = working_lambda(estimate_lambda(K))
    R = lib.truncation_radius
    H = build_H(K.dimension, lib, h_depth or len(lib))
    order = farthest_point_order(K)

    state = PipelineState(lam=lam, delta=delta)
    state.captures.append(base_capture(K))
    tol = config.WITNESS_TOL * R
    for n in range(1, stages + 1):
        x = K.points[order[n - 1]].copy()
        state.points.append(x)
        radius = stage_radius(state.points, K)
        if radius <= 0:
            raise InvalidInputError("stage points must be distinct")
        state.radii.append(radius)
        logger.info(f"stage {n}: x = {x.tolist()}, r = {radius:.4g}")
        try:
            (G, records), budget = run_stage(state, K, H, lam, n, x, radius)
        except (BudgetExceededError, DegenerateSelectionError) as e:
            logger.error(f"stage {n} failed: {e}")
            state.failed_stage = n
            state.error = str(e)
            state.budgets.append(delta * 2.0 ** -n)
            state.records.append([])
            e.state = state
            if isinstance(e, BudgetExceededError) and e.stage is None:
                e.stage = n
            raise
        state.stage = n
        state.budgets.append(budget)
        state.records.append(records)
        state.captures.append(G)

    final = state.captures[-1]
    last_balls = [r.ball_radius for r in state.records[-1]]
    try:
        state.limit = curve_limit(
            [c.curve for c in state.captures], limit_tol, gap_tol=4 * max(last_balls), budgets=state.budgets,
        )
    except VerificationError as e:
        state.error = str(e)
        e.state = state
        raise
    # every witness is judged on the final capture
    for n in range(1, stages + 1):
        _witnesses(state, H, lib, n, tol)
    logger.info(f"pipeline done: spent {state.spent:.4g} of {delta:g}, {sum(v.verdict for v in state.verdicts)}/{len(state.verdicts)} witnesses pass")
    return final, state
