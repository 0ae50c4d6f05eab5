"""quality-verify - quality-aware biometric comparison scoring and calibration."""

__version__ = "0.1.0"
