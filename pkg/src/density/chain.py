"""One-step kernel of the chain and the k-step lattice convolution oracle.

The oracle discretizes the state space on a uniform lattice centred on the
drifted starting point, spanning +-12 standard deviations of the k-step law,
with spacing min(sqrt(h) / 8, range / 4096) and trapezoid weights. Each
call builds its own lattice and dense kernel matrix.
"""

import logging
from dataclasses import dataclass
from typing import Union

import numpy as np
from numpy.typing import ArrayLike

from src.models.coefficients import CoefficientModel
from src.models.grid import GridSpec
from src.models.innovations import InnovationModel
from src.utils.errors import LatticeLeakError, ModelError

# Get the module logger
logger = logging.getLogger(__name__)


def chain_step_kernel(
    coeff: CoefficientModel, innov: InnovationModel, h: float, x: ArrayLike, y: ArrayLike
) -> np.ndarray:
    """Density of X_{l+1} = y given X_l = x: h^{-1/2} q(x, (y - x - m(x) h) / sqrt(h))."""
    if h <= 0.0:
        raise ModelError(f"h must be positive, got {h}")
    x = np.asarray(x, dtype=float)
    root = np.sqrt(h)
    return innov.density(x, (np.asarray(y, dtype=float) - x - coeff.drift(x) * h) / root) / root


@dataclass(frozen=True)
class LatticeConfig:
    """Geometry and tolerance of the convolution oracle."""

    std_multiplier: float = 12.0
    spacing_fraction: float = 0.125
    max_cells: int = 4096
    leak_tolerance: float = 1e-6


class ChainLattice:
    """Lattice propagation of the chain density started at ``x``."""

    def __init__(
        self,
        coeff: CoefficientModel,
        innov: InnovationModel,
        h: float,
        x: float,
        steps: int,
        config: LatticeConfig = LatticeConfig(),
    ):
        """Initialize the lattice for a ``steps``-step law.

        Args:
            coeff: Coefficient model
            innov: Innovation model
            h: Fine time step
            x: Starting state
            steps: Number of chain steps the lattice must accommodate
            config: Lattice geometry and tolerance
        """
        self.coeff = coeff
        self.innov = innov
        self.h = float(h)
        self.x = float(x)
        self.config = config

        horizon = steps * self.h
        centre = self.x + float(coeff.drift(self.x)) * horizon
        half_width = config.std_multiplier * np.sqrt(horizon * coeff.sigma_upper)
        spacing = min(np.sqrt(self.h) * config.spacing_fraction, 2.0 * half_width / config.max_cells)
        cells = int(np.ceil(2.0 * half_width / spacing))
        self.nodes = centre - half_width + spacing * np.arange(cells + 1)
        self.weights = np.full(cells + 1, spacing)
        self.weights[[0, -1]] *= 0.5
        self.spacing = spacing
        # kernel[i, j]: density of moving from node i to node j in one step
        self.kernel = chain_step_kernel(coeff, innov, self.h, self.nodes[:, None], self.nodes[None, :])
        logger.debug(f"Lattice with {cells + 1} nodes, spacing {spacing:.3g}, {steps} steps")

    def initial(self) -> np.ndarray:
        """Density after one step, on the lattice nodes."""
        return chain_step_kernel(self.coeff, self.innov, self.h, self.x, self.nodes)

    def propagate(self, density: np.ndarray, steps: int) -> np.ndarray:
        """Apply ``steps`` further chain steps to a lattice density."""
        for _ in range(steps):
            density = (self.weights * density) @ self.kernel
        return density

    def after(self, steps: int) -> np.ndarray:
        """Density after ``steps`` >= 1 chain steps, on the lattice nodes."""
        return self.propagate(self.initial(), steps - 1)

    def step_to(self, density: np.ndarray, y: ArrayLike) -> np.ndarray:
        """One more step from a lattice density, evaluated at arbitrary points y."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        kernel = chain_step_kernel(self.coeff, self.innov, self.h, self.nodes[:, None], y[None, :])
        return (self.weights * density) @ kernel

    def mass(self, density: np.ndarray) -> float:
        return float(np.sum(self.weights * density))

    def check_mass(self, density: np.ndarray) -> float:
        """Return the leaked mass.

        Raises:
            LatticeLeakError: If it exceeds the configured tolerance
        """
        leaked = abs(1.0 - self.mass(density))
        if leaked > self.config.leak_tolerance:
            raise LatticeLeakError(
                f"lattice lost mass {leaked:.3g} (tolerance {self.config.leak_tolerance:g})",
                leaked_mass=leaked,
            )
        return leaked


def chain_transition_density(
    coeff: CoefficientModel,
    innov: InnovationModel,
    grid: GridSpec,
    x: float,
    y: ArrayLike,
    lattice: LatticeConfig = LatticeConfig(),
) -> Union[float, np.ndarray]:
    """k-step chain density p_h(kh, x, y) by repeated lattice integration.

    Raises:
        LatticeLeakError: If the k-step law leaks out of the lattice
    """
    scalar = np.ndim(y) == 0
    if grid.k == 1:
        values = chain_step_kernel(coeff, innov, grid.h, x, y)
        return float(values) if scalar else values

    chain = ChainLattice(coeff, innov, grid.h, x, grid.k, lattice)
    previous = chain.after(grid.k - 1)
    chain.check_mass(chain.propagate(previous, 1))
    values = chain.step_to(previous, y)
    return float(values[0]) if scalar else values
