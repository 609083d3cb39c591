"""Drift and diffusion coefficient models.

A coefficient model bundles m(x), sigma(x) and the analytic derivatives the
density machinery needs. All callables are vectorized: they accept scalars
or numpy arrays and return float arrays of the same shape.
"""

import logging
from dataclasses import dataclass
from functools import partial
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike

from src.utils.errors import ModelError

# Get the module logger
logger = logging.getLogger(__name__)

CoefficientFn = Callable[[ArrayLike], np.ndarray]


def _constant(value: float, x: ArrayLike) -> np.ndarray:
    return np.full(np.shape(x), value, dtype=float)


def _linear(slope: float, x: ArrayLike) -> np.ndarray:
    return slope * np.asarray(x, dtype=float)


def _sine(amplitude: float, x: ArrayLike) -> np.ndarray:
    return amplitude * np.sin(np.asarray(x, dtype=float))


def _cosine(amplitude: float, x: ArrayLike) -> np.ndarray:
    return amplitude * np.cos(np.asarray(x, dtype=float))


def _tanh_sigma(scale: float, x: ArrayLike) -> np.ndarray:
    return 1.0 + scale * np.tanh(np.asarray(x, dtype=float))


def _tanh_sigma_d(scale: float, x: ArrayLike) -> np.ndarray:
    th = np.tanh(np.asarray(x, dtype=float))
    return scale * (1.0 - th**2)


def _tanh_sigma_dd(scale: float, x: ArrayLike) -> np.ndarray:
    th = np.tanh(np.asarray(x, dtype=float))
    return -2.0 * scale * th * (1.0 - th**2)


@dataclass(frozen=True)
class CoefficientModel:
    """Drift m, diffusion sigma and their derivatives.

    ``sigma_lower`` and ``sigma_upper`` bound sigma(x)**2 (the variance), not
    sigma itself. ``constant`` marks models where both m and sigma are
    constant; ``sigma_constant`` marks models with constant sigma only.
    """

    kind: str
    drift: CoefficientFn
    sigma: CoefficientFn
    drift_d: CoefficientFn
    drift_dd: CoefficientFn
    sigma_d: CoefficientFn
    sigma_dd: CoefficientFn
    sigma_lower: float
    sigma_upper: float
    constant: bool = False
    sigma_constant: bool = False
    params: Tuple[Tuple[str, float], ...] = ()

    def param(self, name: str, default: Optional[float] = None) -> Optional[float]:
        """Look up a construction parameter by name."""
        return dict(self.params).get(name, default)

    @property
    def is_unit(self) -> bool:
        """True for m = 1, sigma = 1."""
        return (
            self.constant
            and float(self.drift(0.0)) == 1.0
            and float(self.sigma(0.0)) == 1.0
        )

    def constant_values(self) -> Tuple[float, float]:
        """Return (m, sigma) for a constant-coefficient model.

        Raises:
            ModelError: If the model is not constant
        """
        if not self.constant:
            raise ModelError(f"Model {self.kind} does not have constant coefficients")
        return float(self.drift(0.0)), float(self.sigma(0.0))

    def describe(self) -> Dict[str, Any]:
        """Serializable identity of the model."""
        return {"kind": self.kind, "params": dict(self.params)}


def constant_model(drift: float = 0.0, sigma: float = 1.0, kind: str = "constant") -> CoefficientModel:
    """Constant drift and diffusion.

    ``sigma = 0`` is accepted so degenerate test models can be built; such a
    model fails ellipticity validation.
    """
    zero = partial(_constant, 0.0)
    variance = float(sigma) ** 2
    return CoefficientModel(
        kind=kind,
        drift=partial(_constant, float(drift)),
        sigma=partial(_constant, float(sigma)),
        drift_d=zero,
        drift_dd=zero,
        sigma_d=zero,
        sigma_dd=zero,
        sigma_lower=variance,
        sigma_upper=variance,
        constant=True,
        sigma_constant=True,
        params=(("drift", float(drift)), ("sigma", float(sigma))),
    )


def unit_model() -> CoefficientModel:
    """m = 1, sigma = 1."""
    return constant_model(1.0, 1.0, kind="unit")


def zero_drift_model() -> CoefficientModel:
    """m = 0, sigma = 1 (standard Brownian motion)."""
    return constant_model(0.0, 1.0, kind="zero-drift")


def smooth_model(a: float = 0.3, b: float = 0.3) -> CoefficientModel:
    """Bounded state-dependent model m(x) = a sin x, sigma(x) = 1 + b tanh x.

    Args:
        a: Drift amplitude
        b: Diffusion modulation, ``|b| < 1`` keeps sigma bounded away from zero

    Raises:
        ModelError: If ``|b| >= 1``
    """
    if abs(b) >= 1.0:
        raise ModelError(f"smooth model requires |b| < 1, got b={b}")
    return CoefficientModel(
        kind="smooth",
        drift=partial(_sine, float(a)),
        sigma=partial(_tanh_sigma, float(b)),
        drift_d=partial(_cosine, float(a)),
        drift_dd=partial(_sine, -float(a)),
        sigma_d=partial(_tanh_sigma_d, float(b)),
        sigma_dd=partial(_tanh_sigma_dd, float(b)),
        sigma_lower=(1.0 - abs(b)) ** 2,
        sigma_upper=(1.0 + abs(b)) ** 2,
        constant=(a == 0.0 and b == 0.0),
        sigma_constant=(b == 0.0),
        params=(("a", float(a)), ("b", float(b))),
    )


def ou_model(theta: float = 1.0, sigma: float = 1.0) -> CoefficientModel:
    """Ornstein-Uhlenbeck model m(x) = -theta x with constant sigma.

    Raises:
        ModelError: If ``theta <= 0`` or ``sigma <= 0``
    """
    if theta <= 0.0 or sigma <= 0.0:
        raise ModelError(f"OU model requires theta > 0 and sigma > 0, got {theta}, {sigma}")
    zero = partial(_constant, 0.0)
    return CoefficientModel(
        kind="ou",
        drift=partial(_linear, -float(theta)),
        sigma=partial(_constant, float(sigma)),
        drift_d=partial(_constant, -float(theta)),
        drift_dd=zero,
        sigma_d=zero,
        sigma_dd=zero,
        sigma_lower=float(sigma) ** 2,
        sigma_upper=float(sigma) ** 2,
        constant=False,
        sigma_constant=True,
        params=(("sigma", float(sigma)), ("theta", float(theta))),
    )


def custom_model(
    drift: CoefficientFn,
    sigma: CoefficientFn,
    drift_d: CoefficientFn,
    drift_dd: CoefficientFn,
    sigma_d: CoefficientFn,
    sigma_dd: CoefficientFn,
    sigma_lower: float,
    sigma_upper: float,
) -> CoefficientModel:
    """User-supplied coefficients; derivatives must be given explicitly."""
    if sigma_lower <= 0.0 or sigma_upper < sigma_lower:
        raise ModelError(
            f"variance bounds must satisfy 0 < lower <= upper, got {sigma_lower}, {sigma_upper}"
        )
    return CoefficientModel(
        kind="custom",
        drift=drift,
        sigma=sigma,
        drift_d=drift_d,
        drift_dd=drift_dd,
        sigma_d=sigma_d,
        sigma_dd=sigma_dd,
        sigma_lower=float(sigma_lower),
        sigma_upper=float(sigma_upper),
    )
