"""
Logging utilities for the markovdiff toolkit
"""
import logging
import os
import sys
from typing import IO, Optional, Union

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def setup_logging(
    level: Optional[Union[str, int]] = None, stream: Optional[IO[str]] = None
) -> logging.Logger:
    """Set up logging for the application.

    Args:
        level: Logging level name or number. Falls back to the
            ``MARKOVDIFF_LOG_LEVEL`` environment variable, then INFO.
        stream: Handler stream, stdout by default

    Returns:
        The configured root logger
    """
    if level is None:
        level = os.getenv("MARKOVDIFF_LOG_LEVEL", "INFO")
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            level = logging.INFO

    logger = logging.getLogger()
    logger.setLevel(level)

    # Clear any existing handlers to avoid duplicates
    if logger.hasHandlers():
        logger.handlers.clear()

    # Create console handler
    console_handler = logging.StreamHandler(stream or sys.stdout)
    console_handler.setLevel(level)

    # Create formatter
    formatter = logging.Formatter(LOG_FORMAT)
    console_handler.setFormatter(formatter)

    # Add handler to logger
    logger.addHandler(console_handler)

    return logger
