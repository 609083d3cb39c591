"""The nested term p conv F1[p conv F1[p]] of the second correction.

The inner pi1 = p conv F1[p] is needed under three more x-derivatives at
every outer node. Outer times u = t sin^2(theta) are split at u = t/2:

    u <  t/2:  p(u, x, z) m(z) D_z^3 pi1(t - u, z, y)
    u >= t/2:  -sum_i C(3, i) D_z^i p(u, x, z) m^(3-i)(z) pi1(t - u, z, y)

with m = mu3/6. The second line is the first integrated by parts in z, so
no derivative ever falls on a factor whose time argument is below t/2.

For each (t, y) and each outer time node the inner factor is evaluated once
on a Chebyshev lattice spanning that node's space window, +-nested_space_sd
bridge widths around the bridge centre, and interpolated onto the outer
space nodes. The window shrinks with the bridge, so the same lattice size
serves every t.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, List, Tuple

import numpy as np
from numpy.polynomial import chebyshev
from numpy.typing import ArrayLike
from scipy import special

from src.density.derivatives import STENCILS, DiffusionDensity
from src.edgeworth.kernels import ConvolutionKernel, DensityKernel, Kernel, QuadratureConfig
from src.edgeworth.operators import skewness_operator
from src.models.innovations import InnovationModel
from src.utils.errors import ModelError

# Get the module logger
logger = logging.getLogger(__name__)

# Difference step for derivatives of the third-moment multiplier.
MULTIPLIER_STEP = 1e-2

BINOMIAL_3 = (1.0, 3.0, 3.0, 1.0)


@dataclass
class NestedEstimate:
    """Nested term with the relative change seen at its last refinement."""

    value: np.ndarray
    change: float
    level: int
    rtol: float

    @property
    def converged(self) -> bool:
        return self.change < self.rtol


@lru_cache(maxsize=16)
def _split_rule(time_nodes: int, space_nodes: int, space_sd: float) -> Tuple[np.ndarray, ...]:
    half = max(time_nodes // 2, 1)
    xi, wi = special.roots_legendre(half)
    lower = 0.125 * np.pi * (xi + 1.0)
    zeta, wz = special.roots_legendre(space_nodes)
    return lower, lower + 0.25 * np.pi, 0.125 * np.pi * wi, space_sd * zeta, space_sd * wz


def _central(fn: Callable[[np.ndarray], np.ndarray], z: np.ndarray, order: int, step: float) -> np.ndarray:
    offsets, weights = STENCILS[order]
    total = np.zeros(z.shape)
    for offset, weight in zip(offsets, weights):
        total += weight * fn(z + offset * step)
    return total / step**order


def _multiplier_derivatives(innov: InnovationModel, z: np.ndarray) -> List[np.ndarray]:
    """m(z) = mu3(z)/6 and its first three derivatives."""

    def multiplier(v: np.ndarray) -> np.ndarray:
        return innov.moment(v, 3) / 6.0

    values = [multiplier(z)]
    for order in (1, 2, 3):
        coarse = _central(multiplier, z, order, MULTIPLIER_STEP)
        fine = _central(multiplier, z, order, 0.5 * MULTIPLIER_STEP)
        values.append((4.0 * fine - coarse) / 3.0)
    return values


def _chebyshev_lattice(
    kernel: Kernel, s: np.ndarray, y: float, lo: np.ndarray, hi: np.ndarray, points: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Chebyshev coefficients of kernel(s_j, ., y) on [lo_j, hi_j], one column per node j."""
    nodes = chebyshev.chebpts1(points)
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    values = kernel(s[:, None], mid[:, None] + half[:, None] * nodes, y)
    return chebyshev.chebfit(nodes, values.T, points - 1), mid, half


def _group_value(
    density: DiffusionDensity,
    innov: InnovationModel,
    t: float,
    x: np.ndarray,
    y: float,
    quad: QuadratureConfig,
    level: int,
    spread_scale: float,
) -> np.ndarray:
    rule = quad.nested_level(level)
    points = max(int(quad.nested_lattice_points * 2.0**level), 4)
    lower, upper, theta_w, zeta, zeta_w = _split_rule(rule.time_nodes, rule.space_nodes, quad.nested_space_sd)
    p = DensityKernel(density)
    inner = ConvolutionKernel(p, skewness_operator(p, innov), rule, spread_scale)

    total = np.zeros(x.size)
    for theta, by_parts in ((lower, False), (upper, True)):
        u = t * np.sin(theta) ** 2
        s = t - u
        jacobian = t * np.sin(2.0 * theta) * theta_w
        centre = x[:, None] + (u / t) * (y - x[:, None])
        spread = spread_scale * np.sqrt(u * s / t)
        reach = quad.nested_space_sd * spread
        coef, mid, half = _chebyshev_lattice(
            inner if by_parts else inner.derivative_x(3),
            s, y, centre.min(axis=0) - reach, centre.max(axis=0) + reach, points,
        )
        z = centre[:, :, None] + spread[:, None] * zeta
        factor = chebyshev.chebval((z - mid[:, None]) / half[:, None], coef[:, :, None], tensor=False)
        multiplier = _multiplier_derivatives(innov, z)
        uu, xx = u[:, None], x[:, None, None]
        if by_parts:
            outer = -sum(
                BINOMIAL_3[i] * density.derivative(uu, xx, z, i, "y") * multiplier[3 - i] for i in range(4)
            )
        else:
            outer = density.value(uu, xx, z) * multiplier[0]
        total += ((outer * factor) @ zeta_w * spread) @ jacobian
    return total


def nested_skewness_term(
    density: DiffusionDensity,
    innov: InnovationModel,
    t: ArrayLike,
    x: ArrayLike,
    y: ArrayLike,
    quad: QuadratureConfig = QuadratureConfig(),
    spread_scale: float = 1.0,
) -> NestedEstimate:
    """Evaluate p conv F1[p conv F1[p]] on broadcastable arrays.

    Starting from the half rule, every node count doubles until two
    successive values differ by less than ``quad.nested_rtol`` relative to
    the largest value, or ``quad.nested_max_refinements`` is used up.

    Args:
        density: Transition density evaluator of the model
        innov: Innovation law supplying the third moment
        t: Elapsed time(s), positive
        x: Start point(s)
        y: End point(s)
        quad: Quadrature settings, the ``nested_*`` fields in particular
        spread_scale: Multiplier on the bridging standard deviation

    Returns:
        The value with the broadcast shape of (t, x, y) and its last change

    Raises:
        ModelError: If some t is not positive
    """
    t, x, y = np.broadcast_arrays(
        np.asarray(t, dtype=float), np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    )
    shape = t.shape
    if innov.symmetric or t.size == 0:
        return NestedEstimate(np.zeros(shape), 0.0, 0, quad.nested_rtol)
    if np.any(t <= 0.0):
        raise ModelError("convolution time must be positive")
    t, x, y = t.ravel(), x.ravel(), y.ravel()
    groups = np.unique(np.stack([t, y], axis=1), axis=0)

    def at_level(level: int) -> np.ndarray:
        value = np.empty(t.size)
        for t0, y0 in groups:
            mask = (t == t0) & (y == y0)
            value[mask] = _group_value(density, innov, t0, x[mask], y0, quad, level, spread_scale)
        return value

    previous = at_level(-1)
    change = np.inf
    level = 0
    for level in range(quad.nested_max_refinements + 1):
        value = at_level(level)
        scale = max(float(np.max(np.abs(value))), quad.atol)
        change = float(np.max(np.abs(value - previous))) / scale
        logger.debug(f"Nested term level {level} on {len(groups)} (t, y) groups: relative change {change:.3g}")
        if change < quad.nested_rtol:
            break
        previous = value
    return NestedEstimate(value.reshape(shape), change, level, quad.nested_rtol)
