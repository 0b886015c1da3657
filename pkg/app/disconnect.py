"""Uniform disconnectedness: chain bottlenecks and the constant lambda.

The bottleneck between x and y (the least possible largest step over all
chains from x to y inside K) is the heaviest edge on the minimum spanning
tree path between them. Kruskal's merge order gives every pair's
bottleneck at once: two points are first joined by the edge that merges
their components, and that edge is their bottleneck.

Ratios that differ by less than RATIO_TIE (relative) are treated as equal.
The same bound covers the rounding of a translate-and-scale of the net, so
the estimate is scale-free to that tolerance, and exactly so for
power-of-two dilations about the origin.
"""
import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order

from app.config import config
from app.errors import InvalidInputError, OffSetPointError
from app.geometry import DiscreteSet, as_point, norms

logger = logging.getLogger(__name__)

RATIO_TIE = 1e-9


@dataclass(frozen=True)
class DisconnectionReport:
    lambda_estimate: float
    witness_pair: Tuple[Tuple[float, ...], Tuple[float, ...]]
    pair_count: int
    bottleneck_edge: Tuple[Tuple[float, ...], Tuple[float, ...]]

    def to_payload(self) -> dict:
        return {
            "lambda": self.lambda_estimate,
            "witness": [list(self.witness_pair[0]), list(self.witness_pair[1])],
            "pairs": self.pair_count,
            "bottleneck_edge": [list(self.bottleneck_edge[0]), list(self.bottleneck_edge[1])],
        }


def minimum_spanning_tree(points: np.ndarray):
    """MST of the complete Euclidean graph by Prim's algorithm.

    Only one row of distances is held at a time, so memory stays linear in
    the number of points.

    Args:
        points: (n, d) array of coordinates.

    Returns:
        (i, j, w) arrays with i < j, sorted by weight and then by index.
    """
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    if n < 2:
        return np.zeros(0, dtype=int), np.zeros(0, dtype=int), np.zeros(0)
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = norms(pts - pts[0])
    best[0] = np.inf
    nearest = np.zeros(n, dtype=int)
    i = np.empty(n - 1, dtype=int)
    j = np.empty(n - 1, dtype=int)
    w = np.empty(n - 1)
    for step in range(n - 1):
        k = int(np.argmin(best))
        if best[k] == 0.0:
            raise InvalidInputError("coincident points: the spanning tree is disconnected")
        i[step], j[step], w[step] = min(nearest[k], k), max(nearest[k], k), best[k]
        in_tree[k] = True
        best[k] = np.inf
        d = norms(pts - pts[k])
        closer = ~in_tree & (d < best)
        best[closer] = d[closer]
        nearest[closer] = k
    order = np.lexsort((j, i, w))
    return i[order], j[order], w[order]


def mst_weight(points: np.ndarray) -> float:
    return float(minimum_spanning_tree(points)[2].sum())


def _tree_matrix(n, i, j, w) -> csr_matrix:
    rows = np.concatenate([i, j])
    cols = np.concatenate([j, i])
    return csr_matrix((np.concatenate([w, w]), (rows, cols)), shape=(n, n))


def _locate(K: DiscreteSet, p) -> int:
    p = as_point(p, K.dimension)
    d = norms(K.points - p)
    idx = int(np.argmin(d))
    if d[idx] > K.resolution:
        raise OffSetPointError(f"point {p.tolist()} is {d[idx]:.3g} from the set (epsilon {K.resolution:g})")
    return idx


def bottleneck_gap(K: DiscreteSet, x, y) -> float:
    """Minimax step over chains in K from x to y."""
    ix, iy = _locate(K, x), _locate(K, y)
    if ix == iy:
        raise InvalidInputError("bottleneck needs two distinct points")
    i, j, w = minimum_spanning_tree(K.points)
    tree = _tree_matrix(len(K), i, j, w)
    _, pred = breadth_first_order(tree, ix, directed=False, return_predecessors=True)
    worst = 0.0
    node = iy
    while node != ix:
        parent = pred[node]
        worst = max(worst, float(tree[node, parent]))
        node = parent
    return worst


def _lex_pair(a: np.ndarray, b: np.ndarray):
    ta, tb = tuple(float(v) for v in a), tuple(float(v) for v in b)
    return (ta, tb) if ta <= tb else (tb, ta)


def _farthest_pairs(pts: np.ndarray, left: List[int], right: List[int], chunk: int = 1 << 20):
    """Largest distance between two index groups and the pairs within a relative 1e-12 of it.

    Rows of ``left`` are taken in chunks of about ``chunk`` distances.
    """
    other = pts[right]
    rows = max(1, chunk // len(right))
    sep = 0.0
    hits = []
    for start in range(0, len(left), rows):
        block = norms(pts[left[start:start + rows]][:, None, :] - other[None, :, :])
        top = float(block.max())
        if top < sep * (1.0 - 1e-12):
            continue
        sep = max(sep, top)
        r, c = np.nonzero(block >= top * (1.0 - 1e-12))
        hits.extend(zip((r + start).tolist(), c.tolist(), block[r, c].tolist()))
    return sep, [(left[r], right[c]) for r, c, v in hits if v >= sep * (1.0 - 1e-12)]


def estimate_lambda(K: DiscreteSet) -> DisconnectionReport:
    """Smallest bottleneck / distance ratio over all distinct pairs.

    Ratios within a relative 1e-9 of each other tie; among ties the pair with
    the larger separation wins, then lexicographic point order.
    """
    n = len(K)
    if n < 2:
        raise InvalidInputError("need ≥ 2 points to estimate lambda")
    pts = K.points
    i, j, w = minimum_spanning_tree(pts)

    parent = list(range(n))
    members = {k: [k] for k in range(n)}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    best = None  # (ratio, separation, pair, edge)
    for a, b, weight in zip(i, j, w):
        ra, rb = find(int(a)), find(int(b))
        if len(members[ra]) < len(members[rb]):
            ra, rb = rb, ra
        left, right = members[ra], members[rb]
        sep, far = _farthest_pairs(pts, left, right)
        pair = min(_lex_pair(pts[p], pts[q]) for p, q in far)
        ratio = float(weight) / sep
        edge = _lex_pair(pts[a], pts[b])
        if best is None or ratio < best[0] * (1.0 - RATIO_TIE):
            best = (ratio, sep, pair, edge)
        elif abs(ratio - best[0]) <= RATIO_TIE * best[0]:
            if sep > best[1] * (1.0 + 1e-12) or (sep >= best[1] * (1.0 - 1e-12) and pair < best[2]):
                best = (min(ratio, best[0]), sep, pair, edge)
        parent[rb] = ra
        left.extend(right)
        del members[rb]

    ratio, _, pair, edge = best
    report = DisconnectionReport(
        lambda_estimate=min(1.0, ratio),
        witness_pair=pair,
        pair_count=n * (n - 1) // 2,
        bottleneck_edge=edge,
    )
    logger.info(f"lambda estimate {report.lambda_estimate:.12g} over {report.pair_count} pairs")
    return report


def working_lambda(report: DisconnectionReport, safety: float = None) -> float:
    """
    Lambda handed to the constructions: the estimate with a safety haircut.

    Args:
        report: Result of estimate_lambda
        safety: Factor in (0, 1]; defaults to TF_LAMBDA_SAFETY

    Returns:
        report.lambda_estimate * safety
    """
    factor = config.LAMBDA_SAFETY if safety is None else safety
    return report.lambda_estimate * factor
