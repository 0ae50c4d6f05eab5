"""Quality-weighted fusion of frame embeddings into one template embedding."""

import dataclasses
import logging
import math
from typing import Iterable, List

import numpy as np

from ..exceptions import CancellationError
from ..models.embedding import QualityEmbedding, Template
from .embedding_math import squared_norm

logger = logging.getLogger(__name__)

CANCELLATION_TOLERANCE = 1e-12


def _is_homogeneous(frames) -> bool:
    first = frames[0]
    return all(
        f.quality == first.quality and np.array_equal(f.direction, first.direction)
        for f in frames[1:]
    )


def aggregate(t: Template) -> QualityEmbedding:
    """Fuse a template's frames.

    The fused vector is v = sum_i q_i * direction_i, its direction v/|v|;
    the fused quality is the quality-weighted mean sum_i q_i^2 / sum_i q_i.
    Sums are compensated so the result does not depend on frame order.

    Examples:
        same direction u, qualities 10 and 30 -> direction u, quality 25

    Raises:
        CancellationError: If the weighted directions cancel (|v| < 1e-12)
    """
    frames = t.frames
    subjects = {f.subject_id for f in frames}
    subject_id = subjects.pop() if len(subjects) == 1 else None

    if _is_homogeneous(frames):
        return dataclasses.replace(frames[0], sample_id=t.template_id, subject_id=subject_id)

    q = np.array([f.quality for f in frames])
    weighted = q[:, None] * np.stack([f.direction for f in frames])
    v = np.array([math.fsum(column) for column in weighted.T])
    norm = math.sqrt(squared_norm(v))
    if norm < CANCELLATION_TOLERANCE:
        raise CancellationError(f"frames of template '{t.template_id}' cancel out (|v|={norm:.3g})")

    quality = math.fsum(q * q) / math.fsum(q)
    quality = min(float(q.max()), max(float(q.min()), quality))
    logger.debug(f"Fused {len(frames)} frames of '{t.template_id}' to quality {quality:.4f}")
    return QualityEmbedding(
        direction=v / norm,
        quality=quality,
        sample_id=t.template_id,
        subject_id=subject_id,
    )


def aggregate_all(templates: Iterable[Template]) -> List[QualityEmbedding]:
    """aggregate over many templates, order preserved."""
    return [aggregate(t) for t in templates]
