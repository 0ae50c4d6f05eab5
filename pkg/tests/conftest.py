"""Pytest configuration and fixtures."""

import numpy as np
import pytest

from src.models.calibration import CalibConfig, OmegaGrid
from src.models.embedding import Embedding
from src.models.scoring import ComparisonSet, WeightParams
from src.models.synth import SynthConfig
from src.services.synth import comparison_set


@pytest.fixture(scope="session")
def reference_params() -> WeightParams:
    """Learned parameters of the largest reference backbone."""
    return WeightParams(alpha=0.077428, beta=0.125926)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def small_embeddings():
    """Three samples, two subjects (A, A, B)."""
    return [
        Embedding(vector=[3.0, 4.0, 0.0, 0.0], sample_id="a1", subject_id="A"),
        Embedding(vector=[6.0, 8.5, 0.5, 0.0], sample_id="a2", subject_id="A"),
        Embedding(vector=[0.0, 1.0, 20.0, 3.0], sample_id="b1", subject_id="B"),
    ]


@pytest.fixture
def planted_set() -> ComparisonSet:
    """Hand-built set where only low-quality genuine pairs sit below the top imposters.

    100 imposters at quality 100 with scores 0.0 .. 0.2475, ten genuine pairs
    at quality 10 scoring 0.2 and ten at quality 100 scoring 0.9.
    """
    imp_raw = np.arange(100) / 400.0
    raw = np.concatenate([imp_raw, np.full(10, 0.2), np.full(10, 0.9)])
    q_min = np.concatenate([np.full(100, 100.0), np.full(10, 10.0), np.full(10, 100.0)])
    is_genuine = np.concatenate([np.zeros(100, bool), np.ones(20, bool)])
    return ComparisonSet.from_arrays(raw, q_min, is_genuine)


@pytest.fixture
def flat_quality_set() -> ComparisonSet:
    """Every pair has the same quality, so no weight can change the ranking."""
    imp_raw = np.arange(100) / 400.0
    gen_raw = np.array([0.1, 0.2, 0.24, 0.5, 0.9])
    raw = np.concatenate([imp_raw, gen_raw])
    q_min = np.full(raw.size, 50.0)
    is_genuine = np.concatenate([np.zeros(100, bool), np.ones(5, bool)])
    return ComparisonSet.from_arrays(raw, q_min, is_genuine)


@pytest.fixture(scope="session")
def small_calib_config() -> CalibConfig:
    """Coarse grid and a narrow FMR range to keep sweeps fast."""
    return CalibConfig(
        fmr_min=1e-3,
        fmr_max=1e-2,
        n_fmr_points=5,
        omega_grid=OmegaGrid(low=-0.2, high=0.0, steps=201),
    )


@pytest.fixture(scope="session")
def planted_world() -> SynthConfig:
    return SynthConfig(seed=3, n_subjects=30, samples_per_subject=8, d=64, genuine_quality_slope=0.008)


@pytest.fixture(scope="session")
def planted_world_set(planted_world) -> ComparisonSet:
    return comparison_set(planted_world)


@pytest.fixture(scope="session")
def reference_world() -> SynthConfig:
    """Strong planted effect on a 1..11 quality scale, sized for the default CalibConfig."""
    return SynthConfig(
        seed=0,
        n_subjects=50,
        samples_per_subject=10,
        d=48,
        quality_range=(1.0, 11.0),
        genuine_quality_slope=0.06,
        max_alignment=0.93,
    )


@pytest.fixture(scope="session")
def no_signal_world() -> SynthConfig:
    return SynthConfig(
        seed=5, n_subjects=30, samples_per_subject=8, d=64, genuine_quality_slope=0.0, noise_sd=0.0
    )


def pytest_collection_modifyitems(config, items):
    for item in items:
        if "unit" in item.path.parts:
            item.add_marker(pytest.mark.unit)
