"""Transition density through the Brownian-bridge representation.

    p(t, x, y) = phat(t, x, y) * E exp[t int_0^1 g(z_d + sqrt(t) B_d) dd]

with z_d = (1 - d) S(x) + d S(y), B a Brownian bridge and

    phat(t, x, y) = exp(-(S(y) - S(x))^2 / (2t) + H(y) - H(x)) / (sqrt(2 pi t) sigma(y)).

The expectation is estimated with a fixed set of bridges (common random
numbers), so the estimate is a smooth function of (x, y) and finite
differences of it are meaningful. When g is constant the expectation is
exp(t g) exactly.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np
from numpy.typing import ArrayLike

from src.density.closed_form import LOG_SQRT_2PI, DensityMethod
from src.models.coefficients import CoefficientModel
from src.models.transforms import lamperti_table
from src.paths.bridge import simulate_bridges
from src.paths.streams import RandomStream
from src.utils.errors import ModelError

# Get the module logger
logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BridgeConfig:
    """Monte-Carlo settings of the bridge expectation."""

    samples: int = 256
    mesh: int = 64
    seed: int = 0
    stream_id: int = 0
    stderr_cap: float = 0.05
    chunk_points: int = 64


@dataclass(frozen=True)
class DensityEstimate:
    """A density value with its Monte-Carlo standard error."""

    value: float
    stderr: float
    method: DensityMethod
    flagged: bool = False


@lru_cache(maxsize=8)
def _shared_bridges(seed: int, stream_id: int, samples: int, mesh: int) -> np.ndarray:
    bridges = simulate_bridges(RandomStream(seed, stream_id), mesh, samples)
    bridges.setflags(write=False)
    return bridges


def log_lamperti_gaussian_factor(
    coeff: CoefficientModel, t: ArrayLike, x: ArrayLike, y: ArrayLike
) -> np.ndarray:
    """log phat(t, x, y)."""
    table = lamperti_table(coeff)
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    gap = table.transform(y) - table.transform(x)
    return (
        -(gap**2) / (2.0 * t)
        + table.tilt(y)
        - table.tilt(x)
        - LOG_SQRT_2PI
        - 0.5 * np.log(t)
        - np.log(coeff.sigma(y))
    )


def lamperti_gaussian_factor(coeff: CoefficientModel, t: ArrayLike, x: ArrayLike, y: ArrayLike) -> np.ndarray:
    """phat(t, x, y), the explicit Gaussian-type factor."""
    return np.exp(log_lamperti_gaussian_factor(coeff, t, x, y))


def bridge_factor(
    coeff: CoefficientModel,
    t: ArrayLike,
    x: ArrayLike,
    y: ArrayLike,
    config: BridgeConfig = BridgeConfig(),
) -> Tuple[np.ndarray, np.ndarray]:
    """Bridge expectation and its standard error, broadcast over (t, x, y).

    Returns:
        Tuple (factor, stderr) of arrays with the broadcast shape
    """
    table = lamperti_table(coeff)
    t, x, y = np.broadcast_arrays(
        np.asarray(t, dtype=float), np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    )
    constant_g = table.constant_potential
    if constant_g is not None:
        return np.exp(t * constant_g), np.zeros(t.shape)

    shape = t.shape
    t, su, sv = t.ravel(), table.transform(x.ravel()), table.transform(y.ravel())
    bridges = _shared_bridges(config.seed, config.stream_id, config.samples, config.mesh)
    delta = np.linspace(0.0, 1.0, config.mesh + 1)
    trapezoid = np.full(config.mesh + 1, 1.0 / config.mesh)
    trapezoid[[0, -1]] *= 0.5

    factor = np.empty(t.size)
    stderr = np.empty(t.size)
    for start in range(0, t.size, config.chunk_points):
        stop = min(start + config.chunk_points, t.size)
        tt = t[start:stop, None, None]
        line = (1.0 - delta) * su[start:stop, None, None] + delta * sv[start:stop, None, None]
        g = table.potential(line + np.sqrt(tt) * bridges[None, :, :])
        weights = np.exp(tt[:, :, 0] * (g @ trapezoid))
        factor[start:stop] = weights.mean(axis=1)
        stderr[start:stop] = weights.std(axis=1, ddof=1) / np.sqrt(config.samples)
    return factor.reshape(shape), stderr.reshape(shape)


def bridge_density(
    coeff: CoefficientModel,
    t: float,
    x: float,
    y: float,
    config: BridgeConfig = BridgeConfig(),
) -> DensityEstimate:
    """Transition density p(t, x, y) from the bridge representation.

    The estimate is flagged when its relative standard error exceeds
    ``config.stderr_cap``.
    """
    if t <= 0.0:
        raise ModelError(f"t must be positive, got {t}")
    factor, factor_err = bridge_factor(coeff, t, x, y, config)
    phat = float(lamperti_gaussian_factor(coeff, t, x, y))
    value = phat * float(factor)
    stderr = phat * float(factor_err)
    flagged = value > 0.0 and stderr > config.stderr_cap * value
    if flagged:
        logger.warning(
            f"Bridge estimate at t={t}, x={x}, y={y} has relative stderr {stderr / value:.3g}"
        )
    method = DensityMethod.CLOSED_FORM if stderr == 0.0 else DensityMethod.BRIDGE_MC
    return DensityEstimate(value, stderr, method, flagged)
