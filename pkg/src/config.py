"""Environment-driven runtime settings."""

import logging
import os

logger = logging.getLogger(__name__)

DEFAULT_LOG_LEVEL = "INFO"


def get_thread_limit() -> int:
    """Return the worker-thread cap from QAV_THREADS.

    Defaults to the CPU count when the variable is unset.

    Raises:
        ValueError: If QAV_THREADS is not a positive integer
    """
    env_val = os.getenv("QAV_THREADS")
    if env_val is None or env_val.strip() == "":
        return max(1, os.cpu_count() or 1)
    try:
        threads = int(env_val)
    except ValueError as e:
        logger.error(f"Invalid QAV_THREADS: '{env_val}' is not a valid integer.")
        raise ValueError(
            f"Invalid QAV_THREADS: '{env_val}' is not a valid integer."
        ) from e
    if threads < 1:
        logger.error(f"Invalid QAV_THREADS: {threads} must be >= 1.")
        raise ValueError(f"Invalid QAV_THREADS: {threads} must be >= 1.")
    return threads


def get_log_level() -> str:
    """Return the log level name from QAV_LOG_LEVEL (default INFO)."""
    return os.getenv("QAV_LOG_LEVEL", DEFAULT_LOG_LEVEL).upper()
