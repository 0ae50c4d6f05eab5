"""Quality-weighting function and quality-aware comparison score.

The quality-aware score lowers a raw cosine score s by
    weight(s) * min(q1, q2),   weight(s) = min{0, beta*s - alpha}
so that a low score between two high-quality samples is trusted less than
the same score between low-quality samples. Qualities are raw embedding
magnitudes; no normalization is applied.
"""

import logging
import math
from typing import Dict, Sequence

import numpy as np
import pandas as pd

from ..exceptions import NonFiniteError, NonPositiveQualityError
from ..models.scoring import ComparisonSet, ScoredPair, WeightParams

logger = logging.getLogger(__name__)

# Learned (alpha, beta) for the three reference magnitude-aware backbones
REFERENCE_PARAMS: Dict[str, WeightParams] = {
    "iresnet18": WeightParams(alpha=0.092861, beta=0.135311),
    "iresnet50": WeightParams(alpha=0.065984, beta=0.103799),
    "iresnet100": WeightParams(alpha=0.077428, beta=0.125926),
}


def weight(s: float, p: WeightParams) -> float:
    """Quality weight for raw score s; always <= 0.

    Examples:
        >>> p = REFERENCE_PARAMS["iresnet100"]
        >>> weight(0.9, p)
        0.0
        >>> round(weight(0.2, p), 6)
        -0.052243
    """
    if not math.isfinite(s):
        raise NonFiniteError(f"score must be finite, got {s}")
    if s >= p.clamp_score:
        return 0.0
    return min(0.0, p.beta * s - p.alpha)


def qa_score(s: float, q1: float, q2: float, p: WeightParams) -> float:
    """Quality-aware score weight(s) * min(q1, q2) + s.

    Raises:
        NonPositiveQualityError: If either quality is not positive
    """
    for q in (q1, q2):
        if not math.isfinite(q):
            raise NonFiniteError(f"quality must be finite, got {q}")
        if q <= 0:
            raise NonPositiveQualityError(f"quality must be > 0, got {q}")
    return weight(s, p) * min(q1, q2) + s


def qa_scores(raw: Sequence[float], q_min: Sequence[float], p: WeightParams) -> np.ndarray:
    """Vectorized qa_score over aligned score and minimum-quality columns.

    Matches the scalar function element for element.
    """
    raw = np.asarray(raw, dtype=np.float64)
    q_min = np.asarray(q_min, dtype=np.float64)
    bad = np.flatnonzero(~np.isfinite(raw) | ~np.isfinite(q_min))
    if bad.size:
        raise NonFiniteError("non-finite score or quality", index=int(bad[0]))
    bad = np.flatnonzero(q_min <= 0)
    if bad.size:
        raise NonPositiveQualityError(f"quality must be > 0, got {q_min[bad[0]]}", index=int(bad[0]))

    w = np.minimum(0.0, p.beta * raw - p.alpha)
    w[raw >= p.clamp_score] = 0.0
    return w * q_min + raw


def qa_score_batch(pairs: Sequence[ScoredPair], p: WeightParams) -> list:
    """Quality-aware scores of scored pairs, order preserved."""
    if not pairs:
        return []
    raw = [pair.raw_score for pair in pairs]
    q_min = [pair.q_min for pair in pairs]
    return qa_scores(raw, q_min, p).tolist()


def rescore(cset: ComparisonSet, p: WeightParams) -> ComparisonSet:
    """Comparison set whose scores are the quality-aware scores of `cset`."""
    return ComparisonSet(
        raw=qa_scores(cset.raw, cset.q_min, p),
        q_min=cset.q_min,
        is_genuine=cset.is_genuine,
        pair_ids=cset.pair_ids,
    )


def score_surface(
    p: WeightParams,
    s_values: Sequence[float],
    q_values: Sequence[float],
) -> pd.DataFrame:
    """Quality-aware score over a (score, quality) grid, for iso-line plots.

    Returns:
        DataFrame with columns s, q_min, weight, qa_score; s varies fastest
    """
    s_grid, q_grid = np.meshgrid(
        np.asarray(s_values, dtype=np.float64),
        np.asarray(q_values, dtype=np.float64),
    )
    s_flat = s_grid.ravel()
    q_flat = q_grid.ravel()
    qa = qa_scores(s_flat, q_flat, p)
    w = np.minimum(0.0, p.beta * s_flat - p.alpha)
    w[s_flat >= p.clamp_score] = 0.0
    logger.debug(f"Score surface with {s_flat.size} cells")
    return pd.DataFrame({"s": s_flat, "q_min": q_flat, "weight": w, "qa_score": qa})
