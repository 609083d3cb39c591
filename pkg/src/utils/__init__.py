"""
Utility functions for the markovdiff toolkit.

This module provides:
- Logging configuration
- Environment-level configuration loaded from ``.env``
- The exception hierarchy shared by every package

These utilities give every package the same logging, configuration and
error-reporting behaviour.
"""

from src.utils.config import load_config
from src.utils.errors import (
    AssumptionError,
    ConfigError,
    DensityUnderflowError,
    DerivativeStepError,
    LatticeLeakError,
    MarkovDiffError,
    ModelError,
    NumericalError,
    QuadratureError,
)
from src.utils.logging import setup_logging

__all__ = [
    'setup_logging',
    'load_config',
    'AssumptionError',
    'ConfigError',
    'DensityUnderflowError',
    'DerivativeStepError',
    'LatticeLeakError',
    'MarkovDiffError',
    'ModelError',
    'NumericalError',
    'QuadratureError',
]
