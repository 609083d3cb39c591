"""Vectorized transition density with spatial derivatives.

``DiffusionDensity`` is the evaluator every higher layer uses. For constant
coefficients and for the Ornstein-Uhlenbeck model it is the exact Gaussian
with Hermite-polynomial derivatives. Otherwise values come from the bridge representation and derivatives from
central finite differences with one Richardson level.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike

from src.density.bridge_density import BridgeConfig, bridge_factor, log_lamperti_gaussian_factor
from src.density.closed_form import (
    DensityMethod,
    gaussian_derivative,
    gaussian_log_density,
    ou_derivative,
    ou_log_density,
)
from src.models.coefficients import CoefficientModel
from src.utils.errors import ConfigError, DerivativeStepError, ModelError

# Get the module logger
logger = logging.getLogger(__name__)

# Second-order accurate central stencils: offsets and weights per order.
STENCILS: Dict[int, Tuple[np.ndarray, np.ndarray]] = {
    1: (np.array([-1, 1]), np.array([-0.5, 0.5])),
    2: (np.array([-1, 0, 1]), np.array([1.0, -2.0, 1.0])),
    3: (np.array([-2, -1, 1, 2]), np.array([-0.5, 1.0, -1.0, 0.5])),
    4: (np.array([-2, -1, 0, 1, 2]), np.array([1.0, -4.0, 6.0, -4.0, 1.0])),
    6: (np.array([-3, -2, -1, 0, 1, 2, 3]), np.array([1.0, -6.0, 15.0, -20.0, 15.0, -6.0, 1.0])),
}


class Derivative(str, Enum):
    """Supported spatial derivatives of p(t, x, y)."""

    DX = "dx"
    DY = "dy"
    DX2 = "dx2"
    DY2 = "dy2"
    DX3 = "dx3"
    DY3 = "dy3"
    DX4 = "dx4"
    DY4 = "dy4"
    DY6 = "dy6"

    @property
    def order(self) -> int:
        suffix = self.value[2:]
        return int(suffix) if suffix else 1

    @property
    def wrt(self) -> str:
        return self.value[1]


@dataclass(frozen=True)
class DerivativeScheme:
    """How derivatives of p are computed.

    ``kind`` is "auto" (analytic when the density is known in closed form), "analytic"
    or "finite-difference". The difference step is
    max(step_floor, step_scale * sqrt(t)).
    """

    kind: str = "auto"
    step_floor: float = 1e-4
    step_scale: float = 1e-2
    max_step_ratio: float = 1.0


class DiffusionDensity:
    """Transition density p(t, x, y) of one coefficient model."""

    def __init__(
        self,
        coeff: CoefficientModel,
        bridge: BridgeConfig = BridgeConfig(),
        scheme: DerivativeScheme = DerivativeScheme(),
    ):
        self.coeff = coeff
        self.bridge = bridge
        self.scheme = scheme
        if scheme.kind not in ("auto", "analytic", "finite-difference"):
            raise ConfigError(f"Unknown derivative scheme {scheme.kind}")
        self._constant = coeff.constant_values() if coeff.constant else None
        self._ou = (coeff.param("theta"), coeff.param("sigma")) if coeff.kind == "ou" else None
        if scheme.kind == "analytic" and not self.closed_form:
            raise ModelError(f"analytic derivatives need a closed-form density, not {coeff.kind}")

    @property
    def closed_form(self) -> bool:
        return self._constant is not None or self._ou is not None

    @property
    def method(self) -> DensityMethod:
        if self.closed_form:
            return DensityMethod.CLOSED_FORM
        return DensityMethod.BRIDGE_MC

    @property
    def analytic_derivatives(self) -> bool:
        return self.closed_form and self.scheme.kind != "finite-difference"

    def log_value(self, t: ArrayLike, x: ArrayLike, y: ArrayLike) -> np.ndarray:
        """log p(t, x, y)."""
        if self._constant is not None:
            drift, sigma = self._constant
            return gaussian_log_density(t, x, y, drift, sigma)
        if self._ou is not None:
            return ou_log_density(t, x, y, *self._ou)
        factor, _ = bridge_factor(self.coeff, t, x, y, self.bridge)
        return log_lamperti_gaussian_factor(self.coeff, t, x, y) + np.log(factor)

    def value(self, t: ArrayLike, x: ArrayLike, y: ArrayLike) -> np.ndarray:
        """p(t, x, y)."""
        return np.exp(self.log_value(t, x, y))

    def estimate(self, t: ArrayLike, x: ArrayLike, y: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
        """p(t, x, y) and its Monte-Carlo standard error."""
        if self.closed_form:
            value = self.value(t, x, y)
            return value, np.zeros_like(value)
        factor, stderr = bridge_factor(self.coeff, t, x, y, self.bridge)
        phat = np.exp(log_lamperti_gaussian_factor(self.coeff, t, x, y))
        return phat * factor, phat * stderr

    def derivative(
        self, t: ArrayLike, x: ArrayLike, y: ArrayLike, order: int, wrt: str = "y"
    ) -> np.ndarray:
        """Spatial derivative of order ``order`` in ``wrt`` ("x" or "y").

        Raises:
            DerivativeStepError: If the difference step is too coarse for t
        """
        if order == 0:
            return self.value(t, x, y)
        if wrt not in ("x", "y"):
            raise ModelError(f"wrt must be 'x' or 'y', got {wrt}")
        if self.analytic_derivatives and self._ou is not None:
            return ou_derivative(t, x, y, order, wrt, *self._ou)
        if self.analytic_derivatives:
            drift, sigma = self._constant
            return gaussian_derivative(t, x, y, order, wrt, drift, sigma)
        return self._finite_difference(t, x, y, order, wrt)

    def _finite_difference(
        self, t: ArrayLike, x: ArrayLike, y: ArrayLike, order: int, wrt: str
    ) -> np.ndarray:
        if order not in STENCILS:
            raise ModelError(f"no finite-difference stencil for order {order}")
        t, x, y = np.broadcast_arrays(
            np.asarray(t, dtype=float), np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        )
        step = np.maximum(self.scheme.step_floor, self.scheme.step_scale * np.sqrt(t))
        too_coarse = step > self.scheme.max_step_ratio * np.sqrt(t)
        if np.any(too_coarse):
            worst = int(np.argmax(too_coarse))
            raise DerivativeStepError(
                f"difference step {step.flat[worst]:.3g} too coarse for t={t.flat[worst]:.3g}",
                step=float(step.flat[worst]),
                t=float(t.flat[worst]),
            )
        offsets, weights = STENCILS[order]

        def central(spacing: np.ndarray) -> np.ndarray:
            total = np.zeros(t.shape)
            for offset, weight in zip(offsets, weights):
                if wrt == "y":
                    total += weight * self.value(t, x, y + offset * spacing)
                else:
                    total += weight * self.value(t, x + offset * spacing, y)
            return total / spacing**order

        coarse = central(step)
        fine = central(0.5 * step)
        return (4.0 * fine - coarse) / 3.0


def density_derivative(
    coeff: CoefficientModel,
    t: float,
    x: float,
    y: float,
    which: Derivative,
    scheme: DerivativeScheme = DerivativeScheme(),
    bridge: BridgeConfig = BridgeConfig(),
) -> float:
    """One spatial derivative of p at a point."""
    which = Derivative(which)
    density = DiffusionDensity(coeff, bridge, scheme)
    return float(density.derivative(t, x, y, which.order, which.wrt))


def derivative_bound_ratios(
    density: DiffusionDensity,
    t_values: Sequence[float],
    x: float = 0.0,
    span: float = 6.0,
    points: int = 121,
) -> Dict[float, Tuple[float, float]]:
    """Largest normalized first and second y-derivatives per t.

    The ratios are |dy p| sqrt(t) / (p (sqrt(t) + r)) and
    |dy2 p| t / (p (1 + sqrt(t) + r)^2) with r = |y - x| / sqrt(t), sampled
    for |y - x| <= span sqrt(t). Bounded values across t confirm the
    Gaussian-type derivative bounds.
    """
    ratios: Dict[float, Tuple[float, float]] = {}
    for t in t_values:
        root = np.sqrt(t)
        y = x + np.linspace(-span, span, points) * root
        r = np.abs(y - x) / root
        p = density.value(t, x, y)
        first = np.abs(density.derivative(t, x, y, 1, "y")) * root / (p * (root + r))
        second = np.abs(density.derivative(t, x, y, 2, "y")) * t / (p * (1.0 + root + r) ** 2)
        ratios[float(t)] = (float(np.max(first)), float(np.max(second)))
    return ratios
