"""Biometric verification metrics.

Match decision is score >= t, so ties match: FMR counts imposter scores
>= t and FNMR counts genuine scores < t. Rates are exact integer counts
divided by class size.
"""

import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from sklearn.metrics import roc_auc_score, roc_curve

from ..exceptions import EmptySetError, NonFiniteError, ScoringError
from ..models.report import VerificationReport
from ..models.scoring import ComparisonSet

logger = logging.getLogger(__name__)

THRESHOLD_EPSILON = 1e-9
REPORT_FMR_TARGETS: Tuple[float, ...] = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5)


def _sorted_readonly(values: Sequence[float], name: str) -> np.ndarray:
    array = np.sort(np.asarray(values, dtype=np.float64).ravel())
    if not np.all(np.isfinite(array)):
        raise NonFiniteError(f"{name} scores contain non-finite values")
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ScoreSet:
    """Genuine and imposter scores, each sorted ascending once at construction."""

    genuine: np.ndarray
    imposter: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "genuine", _sorted_readonly(self.genuine, "genuine"))
        object.__setattr__(self, "imposter", _sorted_readonly(self.imposter, "imposter"))

    @classmethod
    def from_scores(cls, genuine: Sequence[float], imposter: Sequence[float]) -> "ScoreSet":
        return cls(genuine=genuine, imposter=imposter)

    @classmethod
    def from_comparison_set(cls, cset: ComparisonSet) -> "ScoreSet":
        return cls(genuine=cset.raw[cset.is_genuine], imposter=cset.raw[~cset.is_genuine])

    def require_genuine(self) -> None:
        if self.genuine.size == 0:
            raise EmptySetError("no genuine scores")

    def require_imposter(self) -> None:
        if self.imposter.size == 0:
            raise EmptySetError("no imposter scores")


def fmr_at(t: float, scores: ScoreSet) -> float:
    """Fraction of imposter scores >= t.

    Examples:
        imposter [0.1, 0.2, 0.3, 0.4], t=0.25 -> 0.5
    """
    scores.require_imposter()
    n = scores.imposter.size
    accepted = n - int(np.searchsorted(scores.imposter, t, side="left"))
    return accepted / n


def fnmr_at(t: float, scores: ScoreSet) -> float:
    """Fraction of genuine scores < t.

    Examples:
        genuine [0.6, 0.7, 0.8, 0.9], t=0.75 -> 0.5
    """
    scores.require_genuine()
    n = scores.genuine.size
    return int(np.searchsorted(scores.genuine, t, side="left")) / n


def realizable_thresholds(
    tail: np.ndarray,
    n_total: int,
    targets: Sequence[float],
) -> np.ndarray:
    """Smallest observed score whose FMR is <= each target.

    Args:
        tail: The largest scores of the imposter set, sorted ascending
            (the whole set when tail.size == n_total)
        n_total: Size of the full imposter set
        targets: FMR targets

    Returns:
        One threshold per target; max(tail) + 1e-9 where no observed score
        reaches the target. A truncated tail must hold more than
        max(targets) * n_total + 1 scores.
    """
    targets = np.asarray(targets, dtype=np.float64)
    values, first = np.unique(tail, return_index=True)
    counts = tail.size - first
    if tail.size < n_total:
        # ties of the smallest tail value may continue below the tail
        values, counts = values[1:], counts[1:]
    fallback = tail[-1] + THRESHOLD_EPSILON
    if values.size == 0:
        return np.full(targets.shape, fallback)
    rates = counts / n_total  # strictly decreasing
    idx = np.searchsorted(-rates, -targets, side="left")
    found = idx < values.size
    return np.where(found, values[np.minimum(idx, values.size - 1)], fallback)


def _check_target(target: float) -> None:
    if not 0.0 < target < 1.0:
        raise ScoringError(f"FMR target must lie in (0, 1), got {target}")


def threshold_at_fmr(target: float, scores: ScoreSet) -> float:
    """Realizable decision threshold at-or-below an FMR target.

    Returns the smallest observed imposter score t with fmr_at(t) <= target,
    or max imposter score + 1e-9 when none qualifies.

    Examples:
        imposter [0.1, 0.2, 0.3, 0.4], target 0.25 -> 0.4
        imposter [0.1, 0.2, 0.3, 0.4], target 0.20 -> 0.4 + 1e-9
    """
    _check_target(target)
    scores.require_imposter()
    imp = scores.imposter
    return float(realizable_thresholds(imp, imp.size, [target])[0])


def thresholds_at_fmrs(targets: Sequence[float], scores: ScoreSet) -> np.ndarray:
    """threshold_at_fmr for many targets in one pass."""
    for target in targets:
        _check_target(target)
    scores.require_imposter()
    imp = scores.imposter
    return realizable_thresholds(imp, imp.size, targets)


def _rates_on(candidates: np.ndarray, scores: ScoreSet) -> Tuple[np.ndarray, np.ndarray]:
    gen, imp = scores.genuine, scores.imposter
    fmr = (imp.size - np.searchsorted(imp, candidates, side="left")) / imp.size
    fnmr = np.searchsorted(gen, candidates, side="left") / gen.size
    return fmr, fnmr


def eer(scores: ScoreSet) -> Tuple[float, float]:
    """Equal error rate and its threshold.

    Sweeps every observed score as a threshold and takes the one minimizing
    |FMR - FNMR| (the smaller threshold on ties); the EER is the midpoint
    (FMR + FNMR) / 2 there.
    """
    scores.require_genuine()
    scores.require_imposter()
    candidates = np.union1d(scores.genuine, scores.imposter)
    fmr, fnmr = _rates_on(candidates, scores)
    k = int(np.argmin(np.abs(fmr - fnmr)))
    return float((fmr[k] + fnmr[k]) / 2), float(candidates[k])


def _labels_and_scores(scores: ScoreSet) -> Tuple[np.ndarray, np.ndarray]:
    y = np.concatenate([np.ones(scores.genuine.size), np.zeros(scores.imposter.size)])
    s = np.concatenate([scores.genuine, scores.imposter])
    return y, s


def roc_auc(scores: ScoreSet) -> float:
    """Area under the ROC curve; P(genuine > imposter) with ties counting 1/2."""
    scores.require_genuine()
    scores.require_imposter()
    y, s = _labels_and_scores(scores)
    return float(roc_auc_score(y, s))


def roc_points(scores: ScoreSet) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Every ROC operating point as (fmr, fnmr, threshold) arrays.

    The first point uses an infinite threshold (nothing matches).
    """
    scores.require_genuine()
    scores.require_imposter()
    y, s = _labels_and_scores(scores)
    fpr, tpr, thresholds = roc_curve(y, s, drop_intermediate=False)
    return fpr, 1.0 - tpr, thresholds


def verification_report(
    scores: ScoreSet,
    fmr_targets: Sequence[float] = REPORT_FMR_TARGETS,
) -> VerificationReport:
    """EER, AUC and FNMR at a ladder of FMR targets."""
    equal_error, t_eer = eer(scores)
    thresholds = thresholds_at_fmrs(fmr_targets, scores)
    fnmr = {}
    for target, t in zip(fmr_targets, thresholds):
        fnmr[float(target)] = fnmr_at(float(t), scores)
        if target * scores.imposter.size < 1:
            logger.warning(
                f"FMR {target:g} is below 1/{scores.imposter.size} imposters; threshold falls back"
            )
    return VerificationReport(
        eer=equal_error,
        t_eer=t_eer,
        auc=roc_auc(scores),
        fnmr_at_fmr=fnmr,
        thresholds={float(k): float(t) for k, t in zip(fmr_targets, thresholds)},
        n_genuine=scores.genuine.size,
        n_imposter=scores.imposter.size,
    )
