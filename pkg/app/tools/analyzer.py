"""Ledger statistics over splice records."""
import logging
from typing import Iterable, List

import pandas as pd

from app.tools.splice import SpliceRecord

logger = logging.getLogger(__name__)


def splice_frame(records: Iterable[SpliceRecord]) -> pd.DataFrame:
    """One row per splice with the ratio length_delta / gap_witness."""
    rows = [
        {
            "site": ";".join(repr(v) for v in r.site),
            "gap_witness": r.gap_witness,
            "ball_radius": r.ball_radius,
            "copy_scale": r.copy_scale,
            "reroutes": len(r.reroutes),
            "length_delta": r.length_delta,
        }
        for r in records
    ]
    df = pd.DataFrame(rows, columns=["site", "gap_witness", "ball_radius", "copy_scale", "reroutes", "length_delta"])
    df["ratio"] = df["length_delta"] / df["gap_witness"]
    return df


def measure_c0(records: List[SpliceRecord]) -> dict:
    """
    Measured constant C0 with length_delta <= C0 * |x - y_n| at every site.

    Args:
        records: Splice records of one or more stages

    Returns:
        Dict with c0, spread (None when undefined), sites and total added length
    """
    df = splice_frame(records)
    if df.empty:
        return {"c0": 0.0, "spread": 1.0, "sites": 0, "total": 0.0}
    c0 = float(df["ratio"].max())
    low = float(df["ratio"].min())
    spread = c0 / low if low > 0 else None
    logger.info(f"C0 = {c0:.4g} over {len(df)} splices (spread {spread})")
    return {"c0": c0, "spread": spread, "sites": int(len(df)), "total": float(df["length_delta"].sum())}
