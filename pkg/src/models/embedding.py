"""Embedding data models.

An embedding's L2 magnitude is the sample's quality and its direction is the
identity representation. Vectors are stored as read-only float64 arrays.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from ..exceptions import (
    DimensionMismatchError,
    EmbeddingError,
    EmptyTemplateError,
    NonFiniteError,
    NonPositiveQualityError,
    ZeroNormError,
)

ZERO_NORM_TOLERANCE = 1e-12
UNIT_NORM_TOLERANCE = 1e-9


def _frozen_vector(values: Sequence[float]) -> np.ndarray:
    vector = np.array(values, dtype=np.float64)
    if vector.ndim != 1 or vector.size == 0:
        raise EmbeddingError(f"vector must be one-dimensional with d >= 1, got shape {vector.shape}")
    vector.setflags(write=False)
    return vector


def l2_norm(vector: np.ndarray) -> float:
    """Compensated L2 norm of a 1-D vector."""
    return math.sqrt(math.fsum(vector * vector))


@dataclass(frozen=True, eq=False)
class Embedding:
    """A raw embedding vector with its sample and subject ids."""

    vector: np.ndarray
    sample_id: str
    subject_id: Optional[str] = None

    def __post_init__(self):
        vector = _frozen_vector(self.vector)
        if not np.all(np.isfinite(vector)):
            raise NonFiniteError(f"embedding '{self.sample_id}' has non-finite components")
        if l2_norm(vector) < ZERO_NORM_TOLERANCE:
            raise ZeroNormError(f"embedding '{self.sample_id}' has zero norm")
        object.__setattr__(self, "vector", vector)

    @property
    def d(self) -> int:
        return int(self.vector.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Embedding):
            return NotImplemented
        return (
            self.sample_id == other.sample_id
            and self.subject_id == other.subject_id
            and np.array_equal(self.vector, other.vector)
        )


@dataclass(frozen=True, eq=False)
class QualityEmbedding:
    """Unit direction plus positive quality (the original magnitude)."""

    direction: np.ndarray
    quality: float
    sample_id: Optional[str] = None
    subject_id: Optional[str] = None

    def __post_init__(self):
        direction = _frozen_vector(self.direction)
        if not np.all(np.isfinite(direction)) or not math.isfinite(self.quality):
            raise NonFiniteError("quality embedding has non-finite values")
        if self.quality <= 0:
            raise NonPositiveQualityError(f"quality must be > 0, got {self.quality}")
        if abs(l2_norm(direction) - 1.0) > UNIT_NORM_TOLERANCE:
            raise EmbeddingError("direction must have unit length")
        object.__setattr__(self, "direction", direction)
        object.__setattr__(self, "quality", float(self.quality))

    @property
    def d(self) -> int:
        return int(self.direction.shape[0])

    def recompose(self, sample_id: Optional[str] = None) -> Embedding:
        """Rebuild the raw embedding as quality * direction."""
        return Embedding(
            vector=self.quality * self.direction,
            sample_id=sample_id if sample_id is not None else (self.sample_id or ""),
            subject_id=self.subject_id,
        )


@dataclass(frozen=True)
class Template:
    """A set of frames of one subject, fused into a single embedding."""

    frames: Tuple[QualityEmbedding, ...]
    template_id: str

    def __post_init__(self):
        frames = tuple(self.frames)
        if not frames:
            raise EmptyTemplateError(f"template '{self.template_id}' has no frames")
        d = frames[0].d
        for i, frame in enumerate(frames):
            if frame.d != d:
                raise DimensionMismatchError(
                    f"template '{self.template_id}' frame has d={frame.d}, expected {d}",
                    index=i,
                )
        object.__setattr__(self, "frames", frames)

    @property
    def d(self) -> int:
        return self.frames[0].d
