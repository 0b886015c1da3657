"""SVG renderings of sets and curves."""
import io
import logging
from typing import Optional

import matplotlib
matplotlib.use('Agg')  # Non-interactive backend
import matplotlib.pyplot as plt
import numpy as np

from app.curves import PolylineCurve
from app.geometry import DiscreteSet

logger = logging.getLogger(__name__)

# Fixed ids so identical inputs give identical files
plt.rcParams['svg.hashsalt'] = 'tangentfield'


def _title(dimension: int, title: Optional[str]) -> str:
    base = title or ""
    if dimension > 2:
        logger.warning(f"rendering a {dimension}-dimensional object by its first two coordinates")
        base = f"{base} [projected from R^{dimension} to the first two coordinates]".strip()
    return base


def _xy(points: np.ndarray):
    if points.shape[1] == 1:
        return points[:, 0], np.zeros(len(points))
    return points[:, 0], points[:, 1]


def render_svg(
    set_: Optional[DiscreteSet] = None,
    curve: Optional[PolylineCurve] = None,
    title: Optional[str] = None,
) -> str:
    """
    Draw a point set and/or a polyline.

    Args:
        set_: Points to scatter
        curve: Polyline to draw
        title: Figure title

    Returns:
        SVG document as text
    """
    dimension = (set_ or curve).dimension
    fig, ax = plt.subplots(figsize=(6, 6))
    if curve is not None:
        ax.plot(*_xy(curve.vertices), linewidth=0.8, color='tab:blue')
    if set_ is not None:
        ax.scatter(*_xy(set_.points), s=2, color='tab:red')
    ax.set_aspect('equal', adjustable='datalim')
    ax.set_title(_title(dimension, title), fontsize=9)
    buffer = io.StringIO()
    fig.savefig(buffer, format='svg', metadata={'Date': None})
    plt.close(fig)
    return buffer.getvalue()
