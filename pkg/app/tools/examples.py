"""Example sets: stacked self-similar Cantor sets, the recursive comb, middle thirds."""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Tuple

import numpy as np

from app.config import config
from app.curves import PolylineCurve, image_length
from app.errors import InvalidInputError
from app.geometry import DiscreteSet, aw_discrepancy
from app.tangents import blowup

logger = logging.getLogger(__name__)


@dataclass
class CantorStack:
    set: DiscreteSet
    dimensions: Dict[int, float]
    covering_lengths: Dict[int, List[float]]
    resolutions: Dict[int, float]

    def metadata(self) -> dict:
        return {
            "dimensions": {str(k): {"value": v, "expression": f"log({k})/log({k + 1})"} for k, v in self.dimensions.items()},
            "covering_lengths": {str(k): v for k, v in self.covering_lengths.items()},
            "resolutions": {str(k): v for k, v in self.resolutions.items()},
        }


@dataclass
class Tooth:
    stage: int
    index: int
    base: np.ndarray
    tip: np.ndarray
    children: List["Tooth"] = field(default_factory=list)

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.tip - self.base))


@dataclass
class CombCurve:
    curve: PolylineCurve
    stage_lengths: List[float]
    teeth: List[Tooth]

    def metadata(self) -> dict:
        return {"stage_lengths": self.stage_lengths, "teeth": len(self.teeth)}


def self_similar_intervals(k: int, depth: int) -> np.ndarray:
    """Level-`depth` intervals of the k-map Cantor set in [0, 1/k^2] with ratio 1/(k+1)."""
    L = 1.0 / k ** 2
    shift = (L - L / (k + 1)) / (k - 1)
    left = np.array([0.0])
    width = L
    for _ in range(depth):
        width_next = width / (k + 1)
        step = shift * (width / L)
        left = (left[:, None] + step * np.arange(k)[None, :]).reshape(-1)
        width = width_next
    return np.column_stack([left, left + width])


def example_cantor_stack(d: int, kmax: int, depth: int) -> CantorStack:
    if d < 2:
        raise InvalidInputError(f"dimension must be >= 2, got {d}")
    if kmax < 2:
        raise InvalidInputError(f"kmax must be >= 2, got {kmax}")
    if depth < 1:
        raise InvalidInputError(f"depth must be >= 1, got {depth}")
    rows = [np.zeros(d)]
    dims, covers, res = {}, {}, {}
    for k in range(2, kmax + 1):
        ends = np.unique(self_similar_intervals(k, depth).reshape(-1))
        column = np.zeros((len(ends), d))
        column[:, d - 2] = 1.0 / k
        column[:, d - 1] = ends
        rows.extend(column)
        dims[k] = math.log(k) / math.log(k + 1)
        covers[k] = [k ** n * (k + 1) ** -n / k ** 2 for n in range(1, depth + 1)]
        res[k] = (1.0 / k ** 2) * (k + 1) ** -depth
    resolution = max(res.values())
    logger.info(f"Cantor stack k <= {kmax}, depth {depth}: {len(rows)} points at resolution {resolution:.3g}")
    return CantorStack(set=DiscreteSet(d, resolution, np.vstack(rows)), dimensions=dims,
                       covering_lengths=covers, resolutions=res)


def middle_thirds(depth: int, d: int = 2, resolution: float = 1e-4) -> DiscreteSet:
    """Endpoints of the level-`depth` middle-thirds intervals on the first axis."""
    if depth < 0:
        raise InvalidInputError("depth must be >= 0")
    left = [Fraction(0)]
    width = Fraction(1)
    for _ in range(depth):
        width /= 3
        left = [a + s for a in left for s in (Fraction(0), 2 * width)]
    ends = sorted({float(a) for a in left} | {float(a + width) for a in left})
    pts = np.zeros((len(ends), d))
    pts[:, 0] = ends
    return DiscreteSet(d, resolution, pts)


def rationals() -> Iterator[Fraction]:
    """0, 1, 1/2, 1/3, 2/3, 1/4, 3/4, ... (reduced fractions by denominator)."""
    yield Fraction(0)
    yield Fraction(1)
    q = 2
    while True:
        for p in range(1, q):
            if math.gcd(p, q) == 1:
                yield Fraction(p, q)
        q += 1


def van_der_corput(i: int) -> float:
    out, denom = 0.0, 1.0
    while i:
        denom *= 2
        i, bit = divmod(i, 2)
        out += bit / denom
    return out


def _walk(tooth: Tooth, out: List[np.ndarray]) -> None:
    """Out-and-back walk of a tooth and its descendants, ending at its tip."""
    out.append(tooth.base)
    ordered = sorted(tooth.children, key=lambda c: float(np.linalg.norm(c.base - tooth.base)))
    for child in ordered:
        out.append(child.base)
        _walk(child, out)
        out.append(child.base)
    out.append(tooth.tip)


def example_comb(stages: int, teeth: int) -> CombCurve:
    """Finite stages of the comb: teeth perpendicular to the previous stage, shrinking."""
    if stages < 1 or teeth < 1:
        raise InvalidInputError("stages and teeth must be >= 1")
    base = Tooth(stage=0, index=0, base=np.zeros(2), tip=np.array([1.0, 0.0]))
    q = rationals()
    layer = []
    for j in range(teeth):
        x = float(next(q))
        t = Tooth(stage=1, index=j, base=np.array([x, 0.0]), tip=np.array([x, 1.0 / (4 * (j + 1) ** 2)]))
        base.children.append(t)
        layer.append(t)
    all_teeth = list(layer)
    curves = [_comb_curve(base)]
    for n in range(1, stages):
        vertical = n % 2 == 0
        new = []
        for j in range(teeth):
            parent = layer[j % len(layer)]
            position = van_der_corput(j // len(layer) + 1)
            start = parent.base + position * (parent.tip - parent.base)
            step = np.array([0.0, 1.0]) if vertical else np.array([1.0, 0.0])
            t = Tooth(stage=n + 1, index=j, base=start, tip=start + step / ((j + 1) ** 2 * (n + 1) ** 2))
            parent.children.append(t)
            new.append(t)
        layer = new
        all_teeth.extend(new)
        curves.append(_comb_curve(base))
    lengths = [image_length(c) for c in curves]
    logger.info(f"comb with {stages} stages of {teeth} teeth: lengths {[round(v, 6) for v in lengths]}")
    return CombCurve(curve=curves[-1], stage_lengths=lengths, teeth=all_teeth)


def _comb_curve(base: Tooth) -> PolylineCurve:
    verts: List[np.ndarray] = []
    _walk(base, verts)
    return PolylineCurve.through(np.vstack(verts))


def comb_stages(stages: int, teeth: int) -> List[PolylineCurve]:
    """The curves of stages 1..stages, for limit checks."""
    return [example_comb(n, teeth).curve for n in range(1, stages + 1)]


def comb_nonuniqueness_witnesses(comb: CombCurve, stage: int, R: float = 1.0) -> List[Tuple[Tuple[float, ...], float]]:
    """At each tip of the given stage, compare blowups at 0.05h and 2h (h = tooth length).

    Near the tip the curve looks like a ray ending at the origin; at scale 2h
    the tooth's base and the segment it grows from come into view.
    """
    out = []
    for t in comb.teeth:
        if t.stage != stage:
            continue
        h = t.length
        near = blowup(comb.curve, t.tip, 0.05 * h, R)
        far = blowup(comb.curve, t.tip, 2.0 * h, R)
        out.append((tuple(float(v) for v in t.tip), aw_discrepancy(near.base, far.base, R)))
    if not out:
        raise InvalidInputError(f"the comb has no teeth at stage {stage}")
    return out
