"""Scoring data models: weighting parameters, scored pairs, comparison sets."""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from ..exceptions import EmptySetError, NonFiniteError, NonPositiveQualityError, ScoringError


class Label(str, Enum):
    """Comparison label."""

    GENUINE = "genuine"
    IMPOSTER = "imposter"


class WeightParams(BaseModel):
    """Parameters of the quality-weighting function min{0, beta*s - alpha}."""

    model_config = ConfigDict(frozen=True)

    alpha: float  # score units
    beta: float  # score units per score unit

    @field_validator("alpha", "beta")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("must be finite")
        return value

    @property
    def clamp_score(self) -> float:
        """Score at and above which no quality adjustment is applied."""
        if self.beta <= 0:
            return math.inf
        return self.alpha / self.beta


@dataclass(frozen=True)
class ScoredPair:
    """A raw cosine comparison score with the minimum quality of its pair."""

    raw_score: float
    q_min: float
    label: Label
    pair_ids: Tuple[str, str] = ("", "")

    def __post_init__(self):
        if not math.isfinite(self.raw_score):
            raise NonFiniteError(f"raw score must be finite, got {self.raw_score}")
        if not -1.0 <= self.raw_score <= 1.0:
            raise ScoringError(f"raw score must lie in [-1, 1], got {self.raw_score}")
        if not math.isfinite(self.q_min):
            raise NonFiniteError(f"q_min must be finite, got {self.q_min}")
        if self.q_min <= 0:
            raise NonPositiveQualityError(f"q_min must be > 0, got {self.q_min}")
        object.__setattr__(self, "label", Label(self.label))


def _readonly(values, dtype) -> np.ndarray:
    array = np.array(values, dtype=dtype)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ComparisonSet:
    """Genuine and imposter comparisons stored column-wise.

    Use from_pairs or from_arrays to build one; columns are read-only.
    """

    raw: np.ndarray
    q_min: np.ndarray
    is_genuine: np.ndarray
    pair_ids: Tuple[Tuple[str, str], ...] = ()

    def __post_init__(self):
        raw = _readonly(self.raw, np.float64)
        q_min = _readonly(self.q_min, np.float64)
        is_genuine = _readonly(self.is_genuine, bool)
        if not (raw.ndim == q_min.ndim == is_genuine.ndim == 1):
            raise ScoringError("comparison columns must be one-dimensional")
        if not (raw.shape == q_min.shape == is_genuine.shape):
            raise ScoringError(
                f"column lengths differ: raw={raw.size}, q_min={q_min.size}, labels={is_genuine.size}"
            )
        pair_ids = tuple(tuple(p) for p in self.pair_ids)
        if pair_ids and len(pair_ids) != raw.size:
            raise ScoringError(f"{len(pair_ids)} pair ids for {raw.size} comparisons")

        bad = np.flatnonzero(~np.isfinite(raw) | ~np.isfinite(q_min))
        if bad.size:
            raise NonFiniteError("non-finite score or quality", index=int(bad[0]))
        bad = np.flatnonzero(q_min <= 0)
        if bad.size:
            raise NonPositiveQualityError(f"q_min must be > 0, got {q_min[bad[0]]}", index=int(bad[0]))

        object.__setattr__(self, "raw", raw)
        object.__setattr__(self, "q_min", q_min)
        object.__setattr__(self, "is_genuine", is_genuine)
        object.__setattr__(self, "pair_ids", pair_ids)

    @classmethod
    def from_pairs(cls, pairs: Iterable[ScoredPair]) -> "ComparisonSet":
        pairs = list(pairs)
        return cls(
            raw=[p.raw_score for p in pairs],
            q_min=[p.q_min for p in pairs],
            is_genuine=[p.label is Label.GENUINE for p in pairs],
            pair_ids=tuple(p.pair_ids for p in pairs),
        )

    @classmethod
    def from_arrays(
        cls,
        raw: Sequence[float],
        q_min: Sequence[float],
        is_genuine: Sequence[bool],
        pair_ids: Optional[Sequence[Tuple[str, str]]] = None,
    ) -> "ComparisonSet":
        return cls(raw=raw, q_min=q_min, is_genuine=is_genuine, pair_ids=tuple(pair_ids or ()))

    def __len__(self) -> int:
        return int(self.raw.size)

    @property
    def n_genuine(self) -> int:
        return int(np.count_nonzero(self.is_genuine))

    @property
    def n_imposter(self) -> int:
        return len(self) - self.n_genuine

    @property
    def pairs(self) -> List[ScoredPair]:
        ids = self.pair_ids or (("", ""),) * len(self)
        return [
            ScoredPair(
                raw_score=float(s),
                q_min=float(q),
                label=Label.GENUINE if g else Label.IMPOSTER,
                pair_ids=pid,
            )
            for s, q, g, pid in zip(self.raw, self.q_min, self.is_genuine, ids)
        ]

    def split(self) -> Tuple[Tuple[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]]:
        """Return ((genuine raw, genuine q_min), (imposter raw, imposter q_min))."""
        genuine = self.is_genuine
        return (
            (self.raw[genuine], self.q_min[genuine]),
            (self.raw[~genuine], self.q_min[~genuine]),
        )

    def require_labels(self) -> None:
        """Raise EmptySetError unless both labels are present."""
        if self.n_genuine == 0 or self.n_imposter == 0:
            raise EmptySetError(
                f"comparison set needs both labels (genuine={self.n_genuine}, imposter={self.n_imposter})"
            )
