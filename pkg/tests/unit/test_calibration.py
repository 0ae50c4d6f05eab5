"""Tests for the calibration service."""

import asyncio
import logging

import numpy as np
import pytest

from src.exceptions import (
    DegeneratePointsError,
    InsufficientGenuineError,
    InsufficientImpostersError,
    NonPositiveQualityError,
)
from src.models.calibration import CalibConfig, OmegaGrid
from src.models.scoring import ComparisonSet
from src.services.calibration import (
    CalibrationService,
    calibrate,
    fit_linear,
    optimal_weight_at_fmr,
    scaled_score,
)


class TestScaledScore:
    """Tests for scaled_score."""

    def test_zero_is_half(self):
        assert scaled_score(0.0, 0.0, 20.0) == 0.5

    def test_without_sigmoid(self):
        assert scaled_score(0.0, 0.3, 20.0, use_sigmoid=False) == 0.3
        assert scaled_score(-0.05, 0.3, 20.0, use_sigmoid=False) == pytest.approx(-0.7, abs=1e-15)

    def test_negative_weight(self):
        assert scaled_score(-0.05, 0.3, 20.0) == pytest.approx(0.331812, abs=1e-6)

    def test_non_positive_quality(self):
        with pytest.raises(NonPositiveQualityError):
            scaled_score(-0.05, 0.3, 0.0)


class TestFitLinear:
    """Tests for fit_linear."""

    def test_exact_line(self):
        t = [0.2, 0.4, 0.6, 0.8]
        points = [(x, 0.1 * x - 0.05) for x in t]
        p = fit_linear(points)
        assert p.alpha == pytest.approx(0.05, abs=1e-12)
        assert p.beta == pytest.approx(0.1, abs=1e-12)

    def test_two_points(self):
        p = fit_linear([(0.0, 0.0), (1.0, 1.0)])
        assert (p.alpha, p.beta) == (0.0, 1.0)

    def test_matches_normal_equations(self, rng):
        """Test 100 noisy point sets against a numerical least-squares solver."""
        for _ in range(100):
            n = int(rng.integers(2, 60))
            t = rng.uniform(0.3, 0.9, n)
            w = 0.12 * t - 0.09 + rng.normal(0, 0.01, n)
            design = np.column_stack([t, np.ones(n)])
            (slope, intercept), *_ = np.linalg.lstsq(design, w, rcond=None)
            p = fit_linear(list(zip(t, w)))
            assert p.beta == pytest.approx(slope, abs=1e-9)
            assert p.alpha == pytest.approx(-intercept, abs=1e-9)

    def test_single_point(self):
        with pytest.raises(DegeneratePointsError):
            fit_linear([(0.5, -0.01)])

    def test_equal_thresholds(self):
        with pytest.raises(DegeneratePointsError):
            fit_linear([(0.5, -0.01), (0.5, -0.02), (0.5, -0.03)])


class TestOptimalWeight:
    """Tests for optimal_weight_at_fmr."""

    def test_planted_set_moves_low_quality_genuine_above_threshold(self, planted_set):
        """Test the nearest-zero omega that recovers every low-quality genuine pair."""
        omega, t, fnmr = optimal_weight_at_fmr(planted_set, 0.05)
        # low-quality pairs match once -90 * omega >= 0.0375
        assert omega == pytest.approx(-0.0005, abs=1e-9)
        assert fnmr == 0.0
        assert t == pytest.approx(100 * omega + 0.2375, abs=1e-12)

    def test_planted_set_without_weighting(self, planted_set):
        """Test omega fixed at 0 leaves the low-quality half unmatched."""
        cfg = CalibConfig(omega_grid=OmegaGrid(low=-1e-5, high=0.0, steps=2))
        omega, _, fnmr = optimal_weight_at_fmr(planted_set, 0.05, cfg)
        assert omega == 0.0
        assert fnmr == 0.5

    def test_flat_quality_prefers_zero(self, flat_quality_set):
        """Test equal qualities make every omega tie, so omega 0 wins."""
        omega, t, fnmr = optimal_weight_at_fmr(flat_quality_set, 0.05)
        assert omega == 0.0
        assert fnmr == pytest.approx(0.4)
        assert t == 0.2375

    def test_raw_space(self, planted_set):
        cfg = CalibConfig(use_sigmoid=False)
        assert optimal_weight_at_fmr(planted_set, 0.05, cfg) == optimal_weight_at_fmr(planted_set, 0.05)

    def test_threshold_on_qa_axis(self, planted_set):
        """Test the recorded threshold separates the same pairs qa_scores does."""
        omega, t, _ = optimal_weight_at_fmr(planted_set, 0.05)
        x = omega * planted_set.q_min + planted_set.raw
        imposter = x[~planted_set.is_genuine]
        assert np.mean(imposter >= t) <= 0.05
        assert 0.0 < t < 1.0

    def test_too_few_imposters(self):
        cset = ComparisonSet.from_arrays(
            np.r_[np.linspace(0, 0.3, 10), 0.8, 0.9], np.full(12, 20.0), np.r_[np.zeros(10, bool), True, True]
        )
        with pytest.raises(InsufficientImpostersError):
            optimal_weight_at_fmr(cset, 0.01)

    def test_too_few_genuine(self):
        cset = ComparisonSet.from_arrays(
            np.r_[np.linspace(0, 0.3, 100), 0.8], np.full(101, 20.0), np.r_[np.zeros(100, bool), True]
        )
        with pytest.raises(InsufficientGenuineError):
            optimal_weight_at_fmr(cset, 0.05)

    def test_warns_on_thin_tail(self, planted_set, caplog):
        with caplog.at_level(logging.WARNING):
            optimal_weight_at_fmr(planted_set, 0.05)
        assert "imposter pairs expected" in caplog.text


class TestCalibrate:
    """Tests for the full calibration sweep and fit."""

    def test_two_targets_reproduce_fit(self, planted_world_set):
        cfg = CalibConfig(fmr_min=1e-3, fmr_max=1e-2, n_fmr_points=2,
                          omega_grid=OmegaGrid(low=-0.05, high=0.0, steps=101))
        result = calibrate(planted_world_set, cfg)
        assert len(result.points) == 2
        expected = fit_linear([(p.threshold, p.omega_opt) for p in result.points])
        assert result.params == expected
        assert result.fit_r2 == pytest.approx(1.0, abs=1e-9)

    def test_points_per_target(self, planted_world_set, small_calib_config):
        result = calibrate(planted_world_set, small_calib_config)
        targets = small_calib_config.fmr_targets()
        assert [p.fmr_target for p in result.points] == targets.tolist()
        grid = set(small_calib_config.omega_grid.values().tolist())
        assert all(p.omega_opt in grid for p in result.points)
        assert 0.0 <= result.fit_r2 <= 1.0

    def test_line_passes_through_centroid(self, planted_world_set, small_calib_config):
        result = calibrate(planted_world_set, small_calib_config)
        p = result.params
        assert result.mean_omega == pytest.approx(p.beta * result.mean_t - p.alpha, abs=1e-12)
        assert result.mean_t == pytest.approx(result.thresholds().mean(), abs=1e-12)
        assert result.mean_omega == pytest.approx(result.omegas().mean(), abs=1e-12)

    def test_each_point_matches_single_target_search(self, planted_world_set, small_calib_config):
        result = calibrate(planted_world_set, small_calib_config)
        for point in result.points:
            omega, t, fnmr = optimal_weight_at_fmr(planted_world_set, point.fmr_target, small_calib_config)
            assert (omega, t, fnmr) == (point.omega_opt, point.threshold, point.fnmr)

    def test_weight_independent_of_sigmoid(self, planted_world_set, small_calib_config):
        """Test the sigmoid changes neither the chosen omegas nor the fitted line."""
        squashed = calibrate(planted_world_set, small_calib_config)
        raw = calibrate(planted_world_set, small_calib_config.model_copy(update={"use_sigmoid": False}))
        assert squashed.omegas().tolist() == raw.omegas().tolist()
        assert squashed.thresholds().tolist() == raw.thresholds().tolist()
        assert squashed.params == raw.params
        assert raw.use_sigmoid is False

    def test_insufficient_imposters_for_fmr_min(self, planted_world_set):
        """Test FMR 1e-5 needs more imposters than the small world has."""
        with pytest.raises(InsufficientImpostersError):
            calibrate(planted_world_set, CalibConfig())


class TestCalibrationService:
    """Tests for CalibrationService."""

    async def test_thread_count_does_not_change_result(self, planted_world_set, small_calib_config):
        one = await CalibrationService(small_calib_config, max_threads=1).calibrate(planted_world_set)
        four = await CalibrationService(small_calib_config, max_threads=4).calibrate(planted_world_set)
        assert one == four

    async def test_sweep_order(self, planted_world_set, small_calib_config):
        service = CalibrationService(small_calib_config, max_threads=3)
        points = await service.sweep(planted_world_set)
        targets = [p.fmr_target for p in points]
        assert targets == sorted(targets)

    def test_service_reused_across_event_loops(self, planted_world_set, small_calib_config):
        """Test one service instance calibrates under two separate event loops."""
        service = CalibrationService(small_calib_config, max_threads=2)

        async def two_at_once():
            return await asyncio.gather(service.calibrate(planted_world_set), service.calibrate(planted_world_set))

        first = asyncio.run(two_at_once())
        second = asyncio.run(two_at_once())
        assert first == second
        assert first[0] == first[1]

    def test_thread_limit_from_env(self, monkeypatch):
        monkeypatch.setenv("QAV_THREADS", "2")
        assert CalibrationService().max_threads == 2
