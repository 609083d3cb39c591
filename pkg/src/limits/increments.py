"""Per-step corrections along coarse diffusion paths and their products.

Delta_i = delta1(Y_{i-1}, Y_i) evaluated on consecutive coarse observations
of the diffusion. Products of (1 + Delta_i) are accumulated as a sum of
logarithms with the sign tracked separately.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from src.edgeworth.corrections import ExpansionContext, first_ratio, second_ratio
from src.paths.simulate import PathSample
from src.paths.streams import PathOrigin
from src.utils.errors import ModelError

# Get the module logger
logger = logging.getLogger(__name__)


@dataclass
class IncrementSequence:
    """First- and optional second-order corrections, one row per path."""

    first: np.ndarray
    second: Optional[np.ndarray] = None

    @property
    def n_paths(self) -> int:
        return self.first.shape[0]

    @property
    def n(self) -> int:
        return self.first.shape[1]

    def sums(self) -> np.ndarray:
        """Sum of Delta_i per path."""
        return self.first.sum(axis=1)

    def sups(self) -> np.ndarray:
        """max_i |Delta_i| per path."""
        return np.abs(self.first).max(axis=1)

    def quadratic_variation(self) -> np.ndarray:
        """Sum of Delta_i^2 per path."""
        return (self.first**2).sum(axis=1)

    def factors(self, second_order: bool = False) -> np.ndarray:
        """1 + Delta_i, or 1 + Delta_i + Delta_i^(2) with ``second_order``."""
        if not second_order:
            return 1.0 + self.first
        if self.second is None:
            raise ModelError("second-order factors need second-order corrections")
        return 1.0 + self.first + self.second


def correction_increments(
    ctx: ExpansionContext, values: np.ndarray, second_order: bool = False
) -> IncrementSequence:
    """Corrections for a batch of coarse paths.

    Args:
        ctx: Expansion context
        values: Coarse observations, shape (paths, n + 1)
        second_order: Also evaluate Delta_i^(2) = delta2(Y_{i-1}, Y_i)

    Returns:
        The corrections, shape (paths, n)

    Raises:
        DensityUnderflowError: If an observed increment is too extreme
    """
    values = np.atleast_2d(values)
    x, y = values[:, :-1], values[:, 1:]
    first = first_ratio(ctx, x, y)
    second = second_ratio(ctx, x, y) if second_order else None
    return IncrementSequence(first=first, second=second)


def path_correction_increments(
    ctx: ExpansionContext, path: PathSample, second_order: bool = False
) -> IncrementSequence:
    """Corrections along one coarse diffusion path of n + 1 points."""
    if path.origin == PathOrigin.CHAIN:
        raise ModelError("corrections are evaluated along diffusion paths, not chain paths")
    if len(path) != ctx.grid.n + 1:
        raise ModelError(f"expected {ctx.grid.n + 1} coarse points, got {len(path)}")
    return correction_increments(ctx, path.values[None, :], second_order)


def likelihood_product(factors: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """prod_i factors per path through a log-sum with separate sign.

    Args:
        factors: Array of shape (paths, n)

    Returns:
        (product, nonpositive, nonfinite): the products, a mask of paths with
        some factor <= 0 and a mask of paths whose product is not finite
    """
    factors = np.atleast_2d(factors)
    nonpositive = np.any(factors <= 0.0, axis=1)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        log_abs = np.log(np.abs(factors)).sum(axis=1)
        sign = np.prod(np.sign(factors), axis=1)
        product = sign * np.exp(log_abs)
    nonfinite = ~np.isfinite(product)
    if nonpositive.any() or nonfinite.any():
        logger.warning(
            f"{int(nonpositive.sum())} paths with a non-positive factor, "
            f"{int(nonfinite.sum())} with a non-finite product"
        )
    return product, nonpositive, nonfinite
