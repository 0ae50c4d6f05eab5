"""Calibration configuration and result models."""

from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .scoring import WeightParams


class OmegaGrid(BaseModel):
    """Bounded search grid for the quality weight omega."""

    model_config = ConfigDict(frozen=True)

    low: float = -0.2
    high: float = 0.0
    steps: int = Field(default=2001, ge=2)

    @model_validator(mode="after")
    def _check_bounds(self) -> "OmegaGrid":
        if not self.low < self.high <= 0:
            raise ValueError(f"omega grid needs low < high <= 0, got low={self.low}, high={self.high}")
        return self

    @property
    def step(self) -> float:
        return (self.high - self.low) / (self.steps - 1)

    def values(self) -> np.ndarray:
        """Grid values in ascending order; the last value is exactly `high`."""
        return np.linspace(self.low, self.high, self.steps)

    def refined(self, resolution: int) -> "OmegaGrid":
        """Same bounds with `resolution` times finer spacing."""
        return OmegaGrid(low=self.low, high=self.high, steps=(self.steps - 1) * resolution + 1)


class CalibConfig(BaseModel):
    """Settings for learning the quality-weighting function."""

    model_config = ConfigDict(frozen=True)

    fmr_max: float = 1e-2
    fmr_min: float = 1e-5
    n_fmr_points: int = Field(default=40, ge=2)  # log-spaced
    omega_grid: OmegaGrid = Field(default_factory=OmegaGrid)
    use_sigmoid: bool = True

    @model_validator(mode="after")
    def _check_fmr_range(self) -> "CalibConfig":
        if not 0 < self.fmr_min < self.fmr_max < 1:
            raise ValueError(
                f"need 0 < fmr_min < fmr_max < 1, got fmr_min={self.fmr_min}, fmr_max={self.fmr_max}"
            )
        return self

    def fmr_targets(self) -> np.ndarray:
        """Log-spaced FMR targets, ascending, endpoints exact."""
        return np.geomspace(self.fmr_min, self.fmr_max, self.n_fmr_points)


class CalibrationPoint(BaseModel):
    """Optimal weight found for one FMR target."""

    model_config = ConfigDict(frozen=True)

    fmr_target: float
    threshold: float  # on the unsquashed omega * q_min + s axis
    omega_opt: float
    fnmr: float  # achieved at omega_opt


class CalibrationResult(BaseModel):
    """Fitted parameters plus the points and diagnostics behind them."""

    model_config = ConfigDict(frozen=True)

    params: WeightParams
    points: List[CalibrationPoint] = Field(min_length=1)  # ascending fmr_target
    fit_r2: float = Field(ge=0.0, le=1.0)
    mean_t: float
    mean_omega: float
    use_sigmoid: bool = True

    def thresholds(self) -> np.ndarray:
        return np.array([p.threshold for p in self.points])

    def omegas(self) -> np.ndarray:
        return np.array([p.omega_opt for p in self.points])

    @property
    def beta_positive(self) -> bool:
        return self.params.beta > 0

    @property
    def thresholds_monotone(self) -> bool:
        """True when thresholds do not increase as the FMR target increases."""
        t = self.thresholds()
        return bool(np.all(np.diff(t) <= 0))
