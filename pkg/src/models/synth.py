"""Synthetic world configuration."""

from typing import Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator


class SynthConfig(BaseModel):
    """Parameters of the planted quality/score world."""

    model_config = ConfigDict(frozen=True)

    seed: int = Field(default=0, ge=0, lt=2**64)
    n_subjects: int = Field(default=50, ge=1)
    samples_per_subject: int = Field(default=10, ge=1)
    d: int = Field(default=64, ge=2)
    quality_range: Tuple[float, float] = (10.0, 110.0)  # magnitude units
    genuine_quality_slope: float = 0.004  # radians of drift per quality unit
    noise_sd: float = Field(default=0.05, ge=0.0)  # radians
    max_alignment: float = Field(default=0.9, gt=0.0, le=1.0)  # at q_high

    @model_validator(mode="after")
    def _check_quality_range(self) -> "SynthConfig":
        q_low, q_high = self.quality_range
        if not 0 < q_low < q_high:
            raise ValueError(f"need 0 < q_low < q_high, got {self.quality_range}")
        return self

    @property
    def n_samples(self) -> int:
        return self.n_subjects * self.samples_per_subject
