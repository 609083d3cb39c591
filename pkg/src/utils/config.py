"""Environment-level configuration loaded through python-dotenv."""

import os
from typing import Any, Dict

from dotenv import load_dotenv

from src.utils.errors import ConfigError


def load_config() -> Dict[str, Any]:
    """Load environment defaults for the toolkit.

    Reads a ``.env`` file if present and returns the process-wide settings
    that are not part of a run configuration.

    Returns:
        Dictionary with ``log_level``, ``workers`` and ``output_dir``

    Raises:
        ConfigError: If ``MARKOVDIFF_WORKERS`` is not a positive integer
    """
    load_dotenv()

    workers_raw = os.getenv("MARKOVDIFF_WORKERS", "1")
    try:
        workers = int(workers_raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"MARKOVDIFF_WORKERS must be an integer, got {workers_raw!r}") from exc
    if workers < 1:
        raise ConfigError(f"MARKOVDIFF_WORKERS must be positive, got {workers}")

    return {
        "log_level": os.getenv("MARKOVDIFF_LOG_LEVEL", "INFO"),
        "workers": workers,
        "output_dir": os.getenv("MARKOVDIFF_OUTPUT_DIR", "."),
    }
