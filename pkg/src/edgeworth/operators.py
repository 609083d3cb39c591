"""Differential operators that enter the correction terms.

F1[f] = mu_3(x)/6 * D_x^3 f and F2[f] = (mu_4(x) - 3 sigma(x)^4)/24 * D_x^4 f.
The moment multipliers act at the outer argument x and are never
differentiated.

The frozen-generator term compares the squared generator of the diffusion,
L f = a f'' + m f' with a = sigma^2/2, against the same operator with the
coefficients frozen at the starting point.
"""

import logging
from functools import partial
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike

from src.density.derivatives import DiffusionDensity
from src.edgeworth.kernels import (
    DensityKernel,
    Kernel,
    QuadratureConfig,
    ScaledKernel,
    ZeroKernel,
    convolve_time_space,
)
from src.models.coefficients import CoefficientModel
from src.models.innovations import InnovationModel
from src.utils.errors import ModelError

# Get the module logger
logger = logging.getLogger(__name__)


def _third_moment_over_six(innov: InnovationModel, x: ArrayLike) -> np.ndarray:
    return innov.moment(x, 3) / 6.0


def _excess_over_twentyfour(innov: InnovationModel, x: ArrayLike) -> np.ndarray:
    return innov.excess_kurtosis(x) / 24.0


def skewness_operator(kernel: Kernel, innov: InnovationModel) -> Kernel:
    """F1 applied to a kernel; zero for symmetric innovations."""
    if innov.symmetric or kernel.is_zero:
        return ZeroKernel()
    return ScaledKernel(
        kernel.derivative_x(3),
        partial(_third_moment_over_six, innov),
        name=f"F1[{kernel.name}]",
    )


def kurtosis_operator(kernel: Kernel, innov: InnovationModel) -> Kernel:
    """F2 applied to a kernel; zero when the fourth moment is Gaussian."""
    if innov.gaussian_kurtosis or kernel.is_zero:
        return ZeroKernel()
    return ScaledKernel(
        kernel.derivative_x(4),
        partial(_excess_over_twentyfour, innov),
        name=f"F2[{kernel.name}]",
    )


class GeneratorDifferenceKernel(Kernel):
    """(L_frozen^2 - L^2) p(s, z, y) acting on the first spatial argument.

    With a = sigma^2/2 and the frozen values a0, m0 taken at ``frozen_at``:

        L_frozen^2 f = a0^2 f'''' + 2 a0 m0 f''' + m0^2 f''
        L^2 f = a^2 f'''' + 2a(a' + m) f''' + (a a'' + 2a m' + m a' + m^2) f''
                + (a m'' + m m') f'
    """

    def __init__(self, density: DiffusionDensity, coeff: CoefficientModel, frozen_at: float):
        self.density = density
        self.coeff = coeff
        self.frozen_at = float(frozen_at)
        sigma0 = float(coeff.sigma(self.frozen_at))
        self.a0 = 0.5 * sigma0**2
        self.m0 = float(coeff.drift(self.frozen_at))
        self.name = f"(L0^2 - L^2)p[x0={self.frozen_at:g}]"

    @property
    def is_zero(self) -> bool:
        return self.coeff.constant

    def derivative_x(self, order: int) -> Kernel:
        raise ModelError(f"{self.name} is only evaluated, never differentiated")

    def __call__(self, t: ArrayLike, x: ArrayLike, y: ArrayLike) -> np.ndarray:
        if self.is_zero:
            return np.zeros(np.broadcast(t, x, y).shape)
        z = np.asarray(x, dtype=float)
        sigma = self.coeff.sigma(z)
        sigma_d = self.coeff.sigma_d(z)
        a = 0.5 * sigma**2
        a_d = sigma * sigma_d
        a_dd = sigma_d**2 + sigma * self.coeff.sigma_dd(z)
        m = self.coeff.drift(z)
        m_d = self.coeff.drift_d(z)
        m_dd = self.coeff.drift_dd(z)

        d1, d2, d3, d4 = (self.density.derivative(t, z, y, order, "x") for order in (1, 2, 3, 4))
        a0, m0 = self.a0, self.m0
        return (
            (a0**2 - a**2) * d4
            + (2.0 * a0 * m0 - 2.0 * a * (a_d + m)) * d3
            + (m0**2 - (a * a_dd + 2.0 * a * m_d + m * a_d + m**2)) * d2
            - (a * m_dd + m * m_d) * d1
        )


def frozen_generator_term(
    density: DiffusionDensity,
    t: float,
    x: float,
    y: ArrayLike,
    quad: QuadratureConfig = QuadratureConfig(),
    spread_scale: Optional[float] = None,
) -> np.ndarray:
    """1/2 p conv (L_frozen^2 - L^2) p with coefficients frozen at x.

    Vanishes identically for constant coefficients.

    Args:
        density: Transition density evaluator of the model
        t: Elapsed time
        x: Start point, also the freezing point
        y: End point(s)
        quad: Quadrature settings
        spread_scale: Bridging spread multiplier, sqrt(sigma_upper) by default

    Returns:
        Array shaped like ``y``
    """
    coeff = density.coeff
    y = np.asarray(y, dtype=float)
    if coeff.constant:
        return np.zeros(y.shape)
    if spread_scale is None:
        spread_scale = float(np.sqrt(coeff.sigma_upper))
    kernel = GeneratorDifferenceKernel(density, coeff, x)
    value = convolve_time_space(DensityKernel(density), kernel, t, x, y, quad, spread_scale)
    logger.debug(f"Frozen-generator term at t={t}, x={x} over {y.size} end points")
    return 0.5 * value
