"""Quality extraction and cosine comparison of embeddings.

All sums use math.fsum so that scores are correctly rounded regardless of
dimension; a 1e-7 wobble in a cosine can flip pair order in a threshold
search.
"""

import math

import numpy as np

from ..exceptions import DimensionMismatchError
from ..models.embedding import Embedding, QualityEmbedding, l2_norm


def decompose(e: Embedding) -> QualityEmbedding:
    """Split an embedding into unit direction and quality (its L2 norm).

    Examples:
        (3, 4) -> quality 5.0, direction (0.6, 0.8)
    """
    quality = l2_norm(e.vector)
    return QualityEmbedding(
        direction=e.vector / quality,
        quality=quality,
        sample_id=e.sample_id,
        subject_id=e.subject_id,
    )


def squared_norm(vector: np.ndarray) -> float:
    return math.fsum(vector * vector)


def cosine_from_parts(a: np.ndarray, b: np.ndarray, a_sq: float, b_sq: float) -> float:
    """Cosine of two raw vectors given their precomputed squared norms."""
    value = math.fsum(a * b) / math.sqrt(a_sq * b_sq)
    return min(1.0, max(-1.0, value))


def cosine(a: Embedding, b: Embedding) -> float:
    """Cosine similarity of two embeddings, clamped to [-1, 1].

    Symmetric exactly; cosine(e, e) == 1.0 and cosine(e, -e) == -1.0.

    Raises:
        DimensionMismatchError: If the embeddings differ in dimension
    """
    if a.d != b.d:
        raise DimensionMismatchError(
            f"cannot compare '{a.sample_id}' (d={a.d}) with '{b.sample_id}' (d={b.d})"
        )
    return cosine_from_parts(a.vector, b.vector, squared_norm(a.vector), squared_norm(b.vector))
