"""Kernels (t, x, y) -> value and the time-space convolution between them.

    (f conv g)(t, x, y) = int_0^t du int f(u, x, z) g(t - u, z, y) dz

Time is integrated with Gauss-Legendre in theta after u = t sin^2(theta),
which removes the square-root singularities at both ends. For each u the
space integral uses Gauss-Legendre over +-space_sd standard deviations of
the Gaussian bridging x at time 0 and y at time t. Kernels are evaluated on
whole node arrays at once, so every kernel must broadcast over (t, x, y).
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np
from numpy.typing import ArrayLike
from scipy import special

from src.density.derivatives import DiffusionDensity
from src.utils.errors import ModelError, QuadratureError

# Get the module logger
logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QuadratureConfig:
    """Node counts and tolerances of the time-space convolution.

    The ``nested_*`` fields govern the double convolution inside the second
    correction. Its inner convolution is sampled on ``nested_lattice_points``
    Chebyshev points per outer time node, over +-nested_space_sd bridge
    widths, and every node count is doubled until the value settles.
    """

    time_nodes: int = 64
    space_nodes: int = 128
    space_sd: float = 10.0
    rtol: float = 1e-3
    atol: float = 1e-10
    check: bool = True
    chunk_points: int = 64
    nested_time_nodes: int = 32
    nested_space_nodes: int = 48
    nested_lattice_points: int = 64
    nested_space_sd: float = 8.0
    nested_rtol: float = 5e-3
    nested_max_refinements: int = 2

    def refined(self, factor: int = 2) -> "QuadratureConfig":
        """Same settings with ``factor`` times more nodes."""
        return replace(
            self,
            time_nodes=self.time_nodes * factor,
            space_nodes=self.space_nodes * factor,
        )

    def nested_level(self, level: int) -> "QuadratureConfig":
        """Unchecked rule for refinement ``level`` of the nested convolution.

        Level -1 is the half rule the first refinement is compared against.
        """
        scale = 2.0**level
        return replace(
            self,
            time_nodes=max(int(self.nested_time_nodes * scale), 2),
            space_nodes=max(int(self.nested_space_nodes * scale), 2),
            check=False,
        )


class Kernel(ABC):
    """A function of (t, x, y), optionally differentiable in x."""

    name: str = "kernel"

    @abstractmethod
    def __call__(self, t: ArrayLike, x: ArrayLike, y: ArrayLike) -> np.ndarray:
        """Evaluate on broadcastable arrays."""

    @abstractmethod
    def derivative_x(self, order: int) -> "Kernel":
        """Kernel of D_x^order of this kernel."""

    @property
    def is_zero(self) -> bool:
        return False


class ZeroKernel(Kernel):
    """The kernel that vanishes identically."""

    name = "zero"

    def __call__(self, t: ArrayLike, x: ArrayLike, y: ArrayLike) -> np.ndarray:
        return np.zeros(np.broadcast(t, x, y).shape)

    def derivative_x(self, order: int) -> "Kernel":
        return self

    @property
    def is_zero(self) -> bool:
        return True


class DensityKernel(Kernel):
    """D_x^order p(t, x, y) of a diffusion density."""

    def __init__(self, density: DiffusionDensity, order_x: int = 0):
        self.density = density
        self.order_x = order_x
        self.name = "p" if order_x == 0 else f"dx{order_x} p"

    def __call__(self, t: ArrayLike, x: ArrayLike, y: ArrayLike) -> np.ndarray:
        return self.density.derivative(t, x, y, self.order_x, "x")

    def derivative_x(self, order: int) -> "Kernel":
        return DensityKernel(self.density, self.order_x + order)


class ScaledKernel(Kernel):
    """multiplier(x) * base(t, x, y)."""

    def __init__(
        self,
        base: Kernel,
        multiplier: Callable[[ArrayLike], np.ndarray],
        name: str,
        zero: bool = False,
    ):
        self.base = base
        self.multiplier = multiplier
        self.name = name
        self._zero = zero or base.is_zero

    def __call__(self, t: ArrayLike, x: ArrayLike, y: ArrayLike) -> np.ndarray:
        if self._zero:
            return np.zeros(np.broadcast(t, x, y).shape)
        return self.multiplier(x) * self.base(t, x, y)

    def derivative_x(self, order: int) -> "Kernel":
        raise ModelError(f"{self.name}: the multiplier of a scaled kernel is not differentiated")

    @property
    def is_zero(self) -> bool:
        return self._zero


class ConvolutionKernel(Kernel):
    """(f conv g) as a kernel; x enters through f only."""

    def __init__(self, f: Kernel, g: Kernel, quad: QuadratureConfig, spread_scale: float = 1.0):
        self.f = f
        self.g = g
        self.quad = quad
        self.spread_scale = spread_scale
        self.name = f"({f.name} conv {g.name})"

    def __call__(self, t: ArrayLike, x: ArrayLike, y: ArrayLike) -> np.ndarray:
        return convolve_time_space(self.f, self.g, t, x, y, self.quad, self.spread_scale)

    def derivative_x(self, order: int) -> "Kernel":
        return ConvolutionKernel(self.f.derivative_x(order), self.g, self.quad, self.spread_scale)

    @property
    def is_zero(self) -> bool:
        return self.f.is_zero or self.g.is_zero


@lru_cache(maxsize=32)
def _gauss_rule(time_nodes: int, space_nodes: int, space_sd: float) -> Tuple[np.ndarray, ...]:
    xi, wi = special.roots_legendre(time_nodes)
    theta = 0.25 * np.pi * (xi + 1.0)
    theta_weights = 0.25 * np.pi * wi
    zeta, wz = special.roots_legendre(space_nodes)
    return theta, theta_weights, space_sd * zeta, space_sd * wz


def _integrate(
    f: Kernel,
    g: Kernel,
    t: np.ndarray,
    x: np.ndarray,
    y: np.ndarray,
    time_nodes: int,
    space_nodes: int,
    space_sd: float,
    spread_scale: float,
) -> Tuple[np.ndarray, np.ndarray]:
    theta, theta_w, zeta, zeta_w = _gauss_rule(time_nodes, space_nodes, space_sd)
    tt = t[:, None]
    u = tt * np.sin(theta) ** 2
    s = tt - u
    jacobian = tt * np.sin(2.0 * theta) * theta_w
    centre = x[:, None] + (u / tt) * (y[:, None] - x[:, None])
    spread = spread_scale * np.sqrt(u * s / tt)
    z = centre[:, :, None] + spread[:, :, None] * zeta
    integrand = f(u[:, :, None], x[:, None, None], z) * g(s[:, :, None], z, y[:, None, None])
    inner = (integrand @ zeta_w) * spread
    magnitude = (np.abs(integrand) @ zeta_w) * spread
    return (inner * jacobian).sum(axis=1), (magnitude * jacobian).sum(axis=1)


def convolve_time_space(
    f: Kernel,
    g: Kernel,
    t: ArrayLike,
    x: ArrayLike,
    y: ArrayLike,
    quad: QuadratureConfig = QuadratureConfig(),
    spread_scale: float = 1.0,
) -> np.ndarray:
    """Evaluate (f conv g)(t, x, y) on broadcastable arrays.

    When ``quad.check`` is set the result is compared with the rule using
    half the nodes; the difference is the error estimate, accepted if it is
    below atol + rtol * int |integrand|.

    Args:
        f: Left kernel, evaluated at (u, x, z)
        g: Right kernel, evaluated at (t - u, z, y)
        t: Elapsed time(s), positive
        x: Start point(s)
        y: End point(s)
        quad: Quadrature settings
        spread_scale: Multiplier on the bridging standard deviation
            (sqrt of the upper variance bound for state-dependent models)

    Returns:
        Array with the broadcast shape of (t, x, y)

    Raises:
        QuadratureError: If the error estimate exceeds the tolerance
    """
    t, x, y = np.broadcast_arrays(
        np.asarray(t, dtype=float), np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    )
    shape = t.shape
    if f.is_zero or g.is_zero:
        return np.zeros(shape)
    if np.any(t <= 0.0):
        raise ModelError("convolution time must be positive")
    t, x, y = t.ravel(), x.ravel(), y.ravel()

    value = np.empty(t.size)
    worst = 0.0
    for start in range(0, t.size, quad.chunk_points):
        chunk = slice(start, min(start + quad.chunk_points, t.size))
        fine, magnitude = _integrate(
            f, g, t[chunk], x[chunk], y[chunk],
            quad.time_nodes, quad.space_nodes, quad.space_sd, spread_scale,
        )
        value[chunk] = fine
        if quad.check:
            coarse, _ = _integrate(
                f, g, t[chunk], x[chunk], y[chunk],
                max(quad.time_nodes // 2, 2), max(quad.space_nodes // 2, 2),
                quad.space_sd, spread_scale,
            )
            error = np.abs(fine - coarse)
            tolerance = quad.atol + quad.rtol * magnitude
            excess = error / tolerance
            if np.max(excess) > 1.0:
                bad = int(np.argmax(excess))
                raise QuadratureError(
                    f"{f.name} conv {g.name}: error estimate {error[bad]:.3g} "
                    f"exceeds tolerance {tolerance[bad]:.3g}",
                    achieved_error=float(error[bad]),
                    tolerance=float(tolerance[bad]),
                )
            worst = max(worst, float(np.max(error)))
    if quad.check:
        logger.debug(f"{f.name} conv {g.name} on {t.size} points, max error estimate {worst:.3g}")
    return value.reshape(shape)
