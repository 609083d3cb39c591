"""Path simulators for the fine-grid chain and the limiting diffusion.

Each simulator has a single-path form returning a ``PathSample`` and a batch
form returning a (paths, points) matrix. A batch row equals the single-path
result for the same (seed, path id), because both read the same substream.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from src.models.coefficients import CoefficientModel, unit_model
from src.models.grid import GridSpec
from src.models.innovations import InnovationModel
from src.paths.streams import PathOrigin, RandomStream, stacked_noise, stacked_normals
from src.utils.errors import ModelError

# Get the module logger
logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PathSample:
    """A simulated path: times, values and the process that produced it."""

    times: np.ndarray
    values: np.ndarray
    origin: PathOrigin
    path_id: int = 0

    def __post_init__(self) -> None:
        if len(self.times) != len(self.values):
            raise ModelError("times and values must have the same length")
        if len(self.times) == 0 or self.times[0] != 0.0:
            raise ModelError("a path starts at time 0")
        if np.any(np.diff(self.times) <= 0.0):
            raise ModelError("path times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.values)

    def increments(self) -> np.ndarray:
        return np.diff(self.values)


def subsample(path: PathSample, k: int) -> PathSample:
    """Keep every k-th point of a path.

    Raises:
        ModelError: If the number of steps is not divisible by ``k``
    """
    steps = len(path) - 1
    if k < 1 or steps % k != 0:
        raise ModelError(f"path with {steps} steps cannot be subsampled by k={k}")
    return PathSample(path.times[::k], path.values[::k], path.origin, path.path_id)


def simulate_chain_batch(
    coeff: CoefficientModel,
    innov: InnovationModel,
    x0: float,
    grid: GridSpec,
    seed: int,
    path_ids: Sequence[int],
) -> np.ndarray:
    """Fine-grid chain X_{l+1} = X_l + m(X_l) h + sqrt(h) xi_{l+1} for several paths.

    Returns:
        Array of shape (len(path_ids), n k + 1)
    """
    steps = grid.fine_steps
    uniforms, normals = stacked_noise(seed, path_ids, steps)
    values = np.empty((len(path_ids), steps + 1))
    values[:, 0] = x0
    h, sqrt_h = grid.h, np.sqrt(grid.h)
    for step in range(steps):
        x = values[:, step]
        xi = innov.sample(x, uniforms[:, step], normals[:, step])
        values[:, step + 1] = x + coeff.drift(x) * h + sqrt_h * xi
    return values


def simulate_chain(
    coeff: CoefficientModel,
    innov: InnovationModel,
    x0: float,
    grid: GridSpec,
    rng: RandomStream,
) -> PathSample:
    """Simulate one fine-grid chain path of n k steps."""
    values = simulate_chain_batch(coeff, innov, x0, grid, rng.seed, [rng.stream_id])[0]
    times = np.arange(grid.fine_steps + 1) * grid.h
    return PathSample(times, values, PathOrigin.CHAIN, rng.stream_id)


def simulate_euler_batch(
    coeff: CoefficientModel,
    x0: float,
    fine_step: float,
    steps: int,
    seed: int,
    path_ids: Sequence[int],
    normals: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Euler-Maruyama Y_{j+1} = Y_j + m(Y_j) d + sigma(Y_j) sqrt(d) Z_j for several paths.

    Args:
        normals: Pre-drawn (paths, steps) normals; drawn from the path
            substreams when omitted

    Returns:
        Array of shape (len(path_ids), steps + 1)
    """
    if fine_step <= 0.0:
        raise ModelError(f"fine step must be positive, got {fine_step}")
    if normals is None:
        normals = stacked_normals(seed, path_ids, steps)
    values = np.empty((len(path_ids), steps + 1))
    values[:, 0] = x0
    sqrt_step = np.sqrt(fine_step)
    for step in range(steps):
        y = values[:, step]
        values[:, step + 1] = (
            y + coeff.drift(y) * fine_step + coeff.sigma(y) * sqrt_step * normals[:, step]
        )
    return values


def simulate_diffusion_euler(
    coeff: CoefficientModel,
    x0: float,
    fine_step: float,
    steps: int,
    rng: RandomStream,
) -> PathSample:
    """Simulate one Euler-Maruyama path."""
    values = simulate_euler_batch(coeff, x0, fine_step, steps, rng.seed, [rng.stream_id])[0]
    times = np.arange(steps + 1) * fine_step
    return PathSample(times, values, PathOrigin.EULER, rng.stream_id)


def simulate_coarse_diffusion_batch(
    coeff: CoefficientModel,
    x0: float,
    grid: GridSpec,
    seed: int,
    path_ids: Sequence[int],
    substeps: int = 16,
) -> np.ndarray:
    """Diffusion values on the coarse grid kh, 2kh, ..., nkh.

    Constant coefficients and the OU model are sampled from their exact
    transitions; other models use Euler with ``substeps`` steps per
    observation interval.

    Returns:
        Array of shape (len(path_ids), n + 1)
    """
    kh = grid.coarse_step
    if coeff.constant:
        m, s = coeff.constant_values()
        normals = stacked_normals(seed, path_ids, grid.n)
        increments = m * kh + s * np.sqrt(kh) * normals
        values = np.empty((len(path_ids), grid.n + 1))
        values[:, 0] = x0
        values[:, 1:] = x0 + np.cumsum(increments, axis=1)
        return values
    if coeff.kind == "ou":
        theta, s = coeff.param("theta"), coeff.param("sigma")
        normals = stacked_normals(seed, path_ids, grid.n)
        decay = np.exp(-theta * kh)
        spread = s * np.sqrt((1.0 - np.exp(-2.0 * theta * kh)) / (2.0 * theta))
        values = np.empty((len(path_ids), grid.n + 1))
        values[:, 0] = x0
        for step in range(grid.n):
            values[:, step + 1] = decay * values[:, step] + spread * normals[:, step]
        return values
    logger.debug(f"No exact transition for {coeff.kind}; using Euler with {substeps} substeps")
    fine = simulate_euler_batch(coeff, x0, kh / substeps, grid.n * substeps, seed, path_ids)
    return fine[:, ::substeps]


def simulate_diffusion_exact_unit(
    x0: float,
    grid: GridSpec,
    rng: RandomStream,
    coeff: Optional[CoefficientModel] = None,
) -> PathSample:
    """Coarse unit-model diffusion path with exact N(kh, kh) increments.

    Raises:
        ModelError: If a non-unit coefficient model is passed
    """
    if coeff is not None and not coeff.is_unit:
        raise ModelError(f"exact unit simulation called with model {coeff.kind}")
    values = simulate_coarse_diffusion_batch(unit_model(), x0, grid, rng.seed, [rng.stream_id])[0]
    times = np.arange(grid.n + 1) * grid.coarse_step
    return PathSample(times, values, PathOrigin.EXACT_DIFFUSION, rng.stream_id)
