"""Tests for raw versus quality-aware evaluation."""

import numpy as np
import pytest

from src.exceptions import EmptySetError
from src.models.scoring import ComparisonSet
from src.services.evaluation import evaluate, quality_bin_stats
from src.utils.metrics import ScoreSet, eer
from src.utils.qscore import rescore


class TestEvaluate:
    """Tests for evaluate."""

    def test_raw_only(self, planted_set):
        result = evaluate(planted_set, fmr_targets=[0.1, 0.05])
        assert result.quality_aware is None
        table = result.report_table()
        assert list(table.columns) == ["metric", "fmr_target", "raw", "quality_aware"]
        assert table["metric"].tolist() == ["eer", "t_eer", "auc", "fnmr", "fnmr", "threshold", "threshold"]
        assert table["quality_aware"].isna().all()
        assert set(result.roc["kind"]) == {"raw"}

    def test_with_params(self, planted_set, reference_params):
        result = evaluate(planted_set, reference_params, fmr_targets=[0.05])
        expected = eer(ScoreSet.from_comparison_set(rescore(planted_set, reference_params)))[0]
        assert result.quality_aware.eer == expected
        assert result.raw.eer == eer(ScoreSet.from_comparison_set(planted_set))[0]
        assert set(result.roc["kind"]) == {"raw", "quality_aware"}
        assert list(result.roc.columns) == ["kind", "threshold", "fmr", "fnmr"]

    def test_perfect_separation(self):
        cset = ComparisonSet.from_arrays([0.9, 0.8, 0.1, 0.2, 0.3], [20.0] * 5, [True, True, False, False, False])
        result = evaluate(cset, fmr_targets=[0.5])
        assert result.raw.eer == 0.0
        assert result.raw.auc == 1.0
        assert result.raw.fnmr_at_fmr[0.5] == 0.0

    def test_needs_both_labels(self):
        cset = ComparisonSet.from_arrays([0.9, 0.8], [20.0, 20.0], [True, True])
        with pytest.raises(EmptySetError):
            evaluate(cset)


def test_quality_bins(planted_set):
    stats = quality_bin_stats(planted_set, [0.0, 50.0, 200.0])
    genuine = stats[stats["label"] == "genuine"].reset_index(drop=True)
    imposter = stats[stats["label"] == "imposter"].reset_index(drop=True)
    assert genuine["count"].tolist() == [10, 10]
    assert genuine["mean_score"].tolist() == pytest.approx([0.2, 0.9])
    assert imposter["count"].tolist() == [0, 100]
    assert np.isnan(imposter["mean_score"].iloc[0])
