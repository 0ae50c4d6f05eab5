"""Verification report and run manifest models."""

from typing import Any, Dict

from pydantic import BaseModel, Field, field_validator


class VerificationReport(BaseModel):
    """Verification performance of one scored comparison set."""

    eer: float = Field(ge=0.0, le=1.0)
    t_eer: float
    auc: float = Field(ge=0.0, le=1.0)
    fnmr_at_fmr: Dict[float, float]  # FMR target -> FNMR
    thresholds: Dict[float, float]  # FMR target -> decision threshold
    n_genuine: int = Field(ge=1)
    n_imposter: int = Field(ge=1)

    @field_validator("fnmr_at_fmr")
    @classmethod
    def _rates_in_unit_interval(cls, value: Dict[float, float]) -> Dict[float, float]:
        for target, rate in value.items():
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"FNMR at FMR {target} outside [0, 1]: {rate}")
        return value


class RunManifest(BaseModel):
    """Record of one CLI run, written next to its outputs."""

    command: str
    config: Dict[str, Any] = Field(default_factory=dict)  # flags after parsing
    input_digests: Dict[str, str] = Field(default_factory=dict)  # path -> sha256
    outputs: Dict[str, str] = Field(default_factory=dict)  # file name -> sha256
    version: str
    duration_seconds: float = Field(ge=0.0)
