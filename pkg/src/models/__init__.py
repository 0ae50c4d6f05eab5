"""Data models for quality-verify."""

from .embedding import Embedding, QualityEmbedding, Template
from .scoring import ComparisonSet, Label, ScoredPair, WeightParams
from .calibration import CalibConfig, CalibrationPoint, CalibrationResult, OmegaGrid
from .report import RunManifest, VerificationReport
from .synth import SynthConfig

__all__ = [
    "Embedding",
    "QualityEmbedding",
    "Template",
    "ComparisonSet",
    "Label",
    "ScoredPair",
    "WeightParams",
    "CalibConfig",
    "CalibrationPoint",
    "CalibrationResult",
    "OmegaGrid",
    "RunManifest",
    "VerificationReport",
    "SynthConfig",
]
