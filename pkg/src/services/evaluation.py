"""Side-by-side evaluation of raw and quality-aware scores."""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from ..models.report import VerificationReport
from ..models.scoring import ComparisonSet, WeightParams
from ..utils.metrics import REPORT_FMR_TARGETS, ScoreSet, roc_points, verification_report
from ..utils.qscore import rescore

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ["metric", "fmr_target", "raw", "quality_aware"]
ROC_COLUMNS = ["kind", "threshold", "fmr", "fnmr"]


@dataclass
class EvaluationResult:
    """Reports and ROC points for raw and (optionally) quality-aware scores."""

    raw: VerificationReport
    quality_aware: Optional[VerificationReport]
    roc: pd.DataFrame

    def report_table(self) -> pd.DataFrame:
        """Long-format table: one row per metric (and FMR target)."""
        rows = []

        def add(metric, target, getter):
            qa = getter(self.quality_aware) if self.quality_aware is not None else np.nan
            rows.append((metric, target, getter(self.raw), qa))

        add("eer", np.nan, lambda r: r.eer)
        add("t_eer", np.nan, lambda r: r.t_eer)
        add("auc", np.nan, lambda r: r.auc)
        for target in self.raw.fnmr_at_fmr:
            add("fnmr", target, lambda r: r.fnmr_at_fmr[target])
        for target in self.raw.thresholds:
            add("threshold", target, lambda r: r.thresholds[target])
        return pd.DataFrame(rows, columns=REPORT_COLUMNS)


def _roc_frame(kind: str, scores: ScoreSet) -> pd.DataFrame:
    fmr, fnmr, thresholds = roc_points(scores)
    return pd.DataFrame({"kind": kind, "threshold": thresholds, "fmr": fmr, "fnmr": fnmr})


def evaluate(
    cset: ComparisonSet,
    params: Optional[WeightParams] = None,
    fmr_targets: Sequence[float] = REPORT_FMR_TARGETS,
) -> EvaluationResult:
    """Evaluate raw cosine scores and, given params, quality-aware scores."""
    cset.require_labels()
    raw_scores = ScoreSet.from_comparison_set(cset)
    raw_report = verification_report(raw_scores, fmr_targets)
    frames = [_roc_frame("raw", raw_scores)]

    qa_report = None
    if params is not None:
        qa_scores = ScoreSet.from_comparison_set(rescore(cset, params))
        qa_report = verification_report(qa_scores, fmr_targets)
        frames.append(_roc_frame("quality_aware", qa_scores))
        logger.info(f"EER raw={raw_report.eer:.4f} quality-aware={qa_report.eer:.4f}")
    else:
        logger.info(f"EER raw={raw_report.eer:.4f}")

    return EvaluationResult(raw=raw_report, quality_aware=qa_report, roc=pd.concat(frames, ignore_index=True))


def quality_bin_stats(cset: ComparisonSet, edges: Sequence[float]) -> pd.DataFrame:
    """Count and mean raw score per label and q_min bin [edges[i], edges[i+1]).

    Empty bins report a NaN mean.
    """
    edges = np.asarray(edges, dtype=np.float64)
    rows = []
    for label, mask in (("genuine", cset.is_genuine), ("imposter", ~cset.is_genuine)):
        raw, q = cset.raw[mask], cset.q_min[mask]
        for lo, hi in zip(edges[:-1], edges[1:]):
            in_bin = (q >= lo) & (q < hi)
            count = int(np.count_nonzero(in_bin))
            mean = float(np.mean(raw[in_bin])) if count else np.nan
            rows.append((label, float(lo), float(hi), count, mean))
    return pd.DataFrame(rows, columns=["label", "q_low", "q_high", "count", "mean_score"])
