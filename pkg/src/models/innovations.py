"""Innovation density models q(x, .) for the chain increments.

Every family is defined through a standardized law q0 (mean 0, unit variance
for the built-ins) and a state-dependent scale s(x), normally sigma(x):

    q(x, y) = q0(y / s(x)) / s(x)

so that mu_nu(x) = s(x)**nu * mu_nu(q0). Sampling works from pre-drawn base
uniforms and normals, which lets paired experiments share randomness.
"""

import logging
from abc import ABC, abstractmethod
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike
from scipy import integrate, optimize, stats

from src.utils.errors import ModelError, QuadratureError

# Get the module logger
logger = logging.getLogger(__name__)

ScaleFn = Callable[[ArrayLike], np.ndarray]

# Standardized laws are integrated over +-12 standard deviations.
TRUNCATION_SD = 12.0
QUAD_EPSABS = 1e-12
QUAD_EPSREL = 1e-10


def _unit_scale(x: ArrayLike) -> np.ndarray:
    return np.ones(np.shape(x), dtype=float)


class InnovationModel(ABC):
    """Base class for innovation families."""

    kind: str = "abstract"

    def __init__(self, scale: Optional[ScaleFn] = None):
        """Initialize the innovation model.

        Args:
            scale: State-dependent scale s(x); defaults to 1
        """
        self.scale = scale if scale is not None else _unit_scale

    @abstractmethod
    def standardized_density(self, v: ArrayLike) -> np.ndarray:
        """Density q0 of the standardized law."""

    @abstractmethod
    def standardized_sample(self, uniforms: np.ndarray, normals: np.ndarray) -> np.ndarray:
        """Map base uniforms and normals to draws from q0."""

    def standardized_moment(self, nu: int) -> float:
        """Raw moment of q0; quadrature unless a family overrides it."""
        value, abserr = integrate.quad(
            lambda v: v**nu * float(self.standardized_density(v)),
            -TRUNCATION_SD,
            TRUNCATION_SD,
            epsabs=QUAD_EPSABS,
            epsrel=QUAD_EPSREL,
            limit=200,
        )
        return float(value)

    def density(self, x: ArrayLike, y: ArrayLike) -> np.ndarray:
        """Conditional density q(x, y)."""
        s = self.scale(x)
        return self.standardized_density(np.asarray(y, dtype=float) / s) / s

    def sample(self, x: ArrayLike, uniforms: np.ndarray, normals: np.ndarray) -> np.ndarray:
        """Draw innovations at states x from base randomness."""
        return self.scale(x) * self.standardized_sample(uniforms, normals)

    def moment(self, x: ArrayLike, nu: int) -> np.ndarray:
        """Conditional moment mu_nu(x)."""
        return self.scale(x) ** nu * self.standardized_moment(nu)

    def excess_kurtosis(self, x: ArrayLike) -> np.ndarray:
        """mu_4(x) - 3 sigma(x)**4, with sigma(x)**2 = mu_2(x)."""
        return self.moment(x, 4) - 3.0 * self.moment(x, 2) ** 2

    @property
    def skewness(self) -> float:
        """Standardized third moment (state independent by construction)."""
        return self.standardized_moment(3)

    @property
    def symmetric(self) -> bool:
        return self.standardized_moment(3) == 0.0

    @property
    def gaussian_kurtosis(self) -> bool:
        return self.standardized_moment(4) == 3.0 * self.standardized_moment(2) ** 2

    def describe(self) -> Dict[str, Any]:
        """Serializable identity of the innovation family."""
        return {"kind": self.kind, "params": {}}


class GaussianInnovation(InnovationModel):
    """Centered Gaussian innovations with variance s(x)**2.

    ``mean`` shifts the standardized law; it exists only to build
    deliberately non-centered models for validation tests.
    """

    kind = "gaussian"

    def __init__(self, scale: Optional[ScaleFn] = None, mean: float = 0.0):
        super().__init__(scale)
        self.mean = float(mean)

    def standardized_density(self, v: ArrayLike) -> np.ndarray:
        return stats.norm.pdf(np.asarray(v, dtype=float), loc=self.mean)

    def standardized_sample(self, uniforms: np.ndarray, normals: np.ndarray) -> np.ndarray:
        return normals + self.mean

    def standardized_moment(self, nu: int) -> float:
        a = self.mean
        raw = {1: a, 2: 1.0 + a**2, 3: a**3 + 3.0 * a, 4: a**4 + 6.0 * a**2 + 3.0}
        return raw[nu]

    def describe(self) -> Dict[str, Any]:
        params = {"mean": self.mean} if self.mean else {}
        return {"kind": self.kind, "params": params}


def mixture_parameters_from_moments(
    mu3: float, noise_fraction: float = 0.5, mu4: Optional[float] = None
) -> Tuple[float, float, float]:
    """Solve the standardized two-component mixture for target moments.

    The law is w N(d(1-w), s^2) + (1-w) N(-dw, s^2): zero mean, unit variance,
    third moment ``mu3``. ``noise_fraction`` is s^2, the share of variance
    carried by the Gaussian component noise. If ``mu4`` is given the noise
    fraction is solved for instead.

    Args:
        mu3: Target third moment
        noise_fraction: Component variance s^2 in (0, 1)
        mu4: Optional target fourth moment

    Returns:
        Tuple (weight w, separation d, component standard deviation s)

    Raises:
        ModelError: If the targets cannot be reached by the family
    """
    if mu4 is not None:
        noise_fraction = _solve_noise_fraction(mu3, mu4)
    if not 0.0 < noise_fraction < 1.0:
        raise ModelError(f"noise_fraction must lie in (0, 1), got {noise_fraction}")

    m2 = 1.0 - noise_fraction
    v = 1.0 / (4.0 + mu3**2 / m2**3)
    weight = 0.5 * (1.0 - np.sqrt(max(1.0 - 4.0 * v, 0.0)))
    separation = np.copysign(np.sqrt(m2 / v), mu3 if mu3 != 0.0 else 1.0)
    return float(weight), float(separation), float(np.sqrt(noise_fraction))


def _mixture_mu4(mu3: float, noise_fraction: float) -> float:
    m2 = 1.0 - noise_fraction
    v = 1.0 / (4.0 + mu3**2 / m2**3)
    m4 = (1.0 - 3.0 * v) * m2**2 / v
    return m4 + 6.0 * m2 * noise_fraction + 3.0 * noise_fraction**2


def _solve_noise_fraction(mu3: float, mu4: float) -> float:
    lower, upper = 1e-9, 1.0 - 1e-6
    f_lower = _mixture_mu4(mu3, lower) - mu4
    f_upper = _mixture_mu4(mu3, upper) - mu4
    if f_lower * f_upper > 0.0:
        raise ModelError(
            f"mixture cannot reach mu3={mu3}, mu4={mu4}; attainable fourth moments "
            f"start at {_mixture_mu4(mu3, lower):.6g}"
        )
    return float(optimize.brentq(lambda f: _mixture_mu4(mu3, f) - mu4, lower, upper, xtol=1e-14))


class MixtureInnovation(InnovationModel):
    """Skewed zero-mean two-component Gaussian mixture.

    Component means are d(1-w) with probability w and -dw with probability
    1-w; both components have standard deviation s. With
    v = w(1-w) and m2 = v d^2 the raw moments are

        mu2 = m2 + s^2
        mu3 = v (1 - 2w) d^3
        mu4 = v (1 - 3v) d^4 + 6 m2 s^2 + 3 s^4
    """

    kind = "mixture"

    def __init__(
        self,
        weight: float,
        separation: float,
        component_sd: float,
        scale: Optional[ScaleFn] = None,
    ):
        super().__init__(scale)
        if not 0.0 < weight < 1.0:
            raise ModelError(f"mixture weight must lie in (0, 1), got {weight}")
        if component_sd <= 0.0:
            raise ModelError(f"component_sd must be positive, got {component_sd}")
        self.weight = float(weight)
        self.separation = float(separation)
        self.component_sd = float(component_sd)
        self.upper_mean = self.separation * (1.0 - self.weight)
        self.lower_mean = -self.separation * self.weight

    @classmethod
    def from_moments(
        cls,
        mu3: float,
        noise_fraction: float = 0.5,
        mu4: Optional[float] = None,
        scale: Optional[ScaleFn] = None,
    ) -> "MixtureInnovation":
        """Build the unit-variance mixture with third moment ``mu3``."""
        weight, separation, component_sd = mixture_parameters_from_moments(
            mu3, noise_fraction, mu4
        )
        logger.debug(
            f"Mixture for mu3={mu3}: w={weight:.6f}, d={separation:.6f}, s={component_sd:.6f}"
        )
        return cls(weight, separation, component_sd, scale)

    def standardized_density(self, v: ArrayLike) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        s = self.component_sd
        return self.weight * stats.norm.pdf(v, self.upper_mean, s) + (
            1.0 - self.weight
        ) * stats.norm.pdf(v, self.lower_mean, s)

    def standardized_sample(self, uniforms: np.ndarray, normals: np.ndarray) -> np.ndarray:
        centers = np.where(uniforms < self.weight, self.upper_mean, self.lower_mean)
        return centers + self.component_sd * normals

    def standardized_moment(self, nu: int) -> float:
        w, d, s = self.weight, self.separation, self.component_sd
        v = w * (1.0 - w)
        m2 = v * d**2
        raw = {
            1: 0.0,
            2: m2 + s**2,
            3: v * (1.0 - 2.0 * w) * d**3,
            4: v * (1.0 - 3.0 * v) * d**4 + 6.0 * m2 * s**2 + 3.0 * s**4,
        }
        return float(raw[nu])

    def describe(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "params": {
                "component_sd": self.component_sd,
                "separation": self.separation,
                "weight": self.weight,
            },
        }


def innovation_moment(innov: InnovationModel, x: float, nu: int) -> float:
    """Conditional moment mu_nu(x) of the innovation law.

    Built-in families answer in closed form; other families fall back to
    quadrature of y**nu q(x, y).

    Args:
        innov: Innovation model
        x: Current state
        nu: Moment order in 1..4

    Returns:
        The moment value

    Raises:
        ModelError: If ``nu`` is outside 1..4
    """
    if nu not in (1, 2, 3, 4):
        raise ModelError(f"moment order must be in 1..4, got {nu}")
    return float(innov.moment(x, nu))


def quadrature_moment(innov: InnovationModel, x: float, nu: int) -> float:
    """Moment of q(x, .) by adaptive quadrature (nu = 0 gives the mass).

    Raises:
        QuadratureError: If the adaptive rule reports non-convergence
    """
    s = float(innov.scale(x))
    half_width = TRUNCATION_SD * s
    result = integrate.quad(
        lambda y: y**nu * float(innov.density(x, y)),
        -half_width,
        half_width,
        epsabs=QUAD_EPSABS,
        epsrel=QUAD_EPSREL,
        limit=200,
        full_output=1,
    )
    if len(result) > 3:
        raise QuadratureError(
            f"moment {nu} at x={x}: {result[3]}", achieved_error=float(result[1])
        )
    return float(result[0])
