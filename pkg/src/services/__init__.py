"""Services for quality-verify."""

from .calibration import CalibrationService, calibrate, fit_linear, optimal_weight_at_fmr, scaled_score
from .evaluation import EvaluationResult, evaluate, quality_bin_stats
from .synth import SyntheticDataGenerator, brute_force_optimum, generate, planted_oracle

__all__ = [
    "CalibrationService",
    "calibrate",
    "fit_linear",
    "optimal_weight_at_fmr",
    "scaled_score",
    "EvaluationResult",
    "evaluate",
    "quality_bin_stats",
    "SyntheticDataGenerator",
    "brute_force_optimum",
    "generate",
    "planted_oracle",
]
