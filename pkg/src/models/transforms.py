"""Lamperti transform and the drift potentials of the bridge representation.

With S(x) = int_0^x du / sigma(u) the diffusion dY = m dt + sigma dW becomes
a unit-diffusion process dZ = C(Z) dt + dW in the variable u = S(y), where

    C(u)  = (m / sigma - sigma' / 2)(S^{-1}(u))
    C'(u) = (m' - m sigma' / sigma - sigma sigma'' / 2)(S^{-1}(u))
    g(u)  = -(C(u)**2 + C'(u)) / 2
    H(x)  = int_0^{S(x)} C(u) du = int_0^x m / sigma**2 - log(sigma(x) / sigma(0)) / 2

Scalar operations use adaptive quadrature. ``lamperti_table`` provides the
vectorized versions used inside the density code.
"""

import logging
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike
from scipy import integrate, interpolate, optimize, special

from src.models.coefficients import CoefficientModel
from src.utils.errors import QuadratureError

# Get the module logger
logger = logging.getLogger(__name__)

QUAD_EPSABS = 1e-10
QUAD_EPSREL = 1e-8


def _adaptive_integral(fn: Callable[[float], float], lower: float, upper: float, what: str) -> float:
    result = integrate.quad(
        fn, lower, upper, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200, full_output=1
    )
    if len(result) > 3:
        raise QuadratureError(
            f"{what}: adaptive quadrature did not converge ({result[3]})",
            achieved_error=float(result[1]),
            tolerance=QUAD_EPSABS,
        )
    return float(result[0])


def lamperti_transform(coeff: CoefficientModel, x: float) -> float:
    """S(x) = int_0^x du / sigma(u).

    Raises:
        QuadratureError: If the adaptive rule does not converge
    """
    if coeff.sigma_constant:
        return float(x) / float(coeff.sigma(0.0))
    return _adaptive_integral(lambda u: 1.0 / float(coeff.sigma(u)), 0.0, float(x), "S")


def inverse_lamperti(coeff: CoefficientModel, u: float) -> float:
    """Solve S(x) = u.

    Since sigma(x)**2 lies in [sigma_lower, sigma_upper], the root is
    bracketed by u * sqrt(sigma_lower) and u * sqrt(sigma_upper).
    """
    if coeff.sigma_constant:
        return float(u) * float(coeff.sigma(0.0))
    if u == 0.0:
        return 0.0
    ends = sorted((u * np.sqrt(coeff.sigma_lower), u * np.sqrt(coeff.sigma_upper)))
    lower = ends[0] - 1e-9 * (1.0 + abs(ends[0]))
    upper = ends[1] + 1e-9 * (1.0 + abs(ends[1]))
    return float(
        optimize.brentq(lambda x: lamperti_transform(coeff, x) - u, lower, upper, xtol=1e-13)
    )


def _potential_at_state(coeff: CoefficientModel, x: ArrayLike) -> np.ndarray:
    return coeff.drift(x) / coeff.sigma(x) - 0.5 * coeff.sigma_d(x)


def _potential_derivative_at_state(coeff: CoefficientModel, x: ArrayLike) -> np.ndarray:
    m, s = coeff.drift(x), coeff.sigma(x)
    return coeff.drift_d(x) - m * coeff.sigma_d(x) / s - 0.5 * s * coeff.sigma_dd(x)


def drift_potential(coeff: CoefficientModel, u: float) -> float:
    """C(u), the drift of the Lamperti-transformed process."""
    return float(_potential_at_state(coeff, inverse_lamperti(coeff, u)))


def drift_potential_derivative(coeff: CoefficientModel, u: float) -> float:
    """C'(u) by the chain rule through S^{-1}."""
    return float(_potential_derivative_at_state(coeff, inverse_lamperti(coeff, u)))


def bridge_potential(coeff: CoefficientModel, u: float) -> float:
    """g(u) = -(C(u)**2 + C'(u)) / 2."""
    x = inverse_lamperti(coeff, u)
    c = _potential_at_state(coeff, x)
    return float(-0.5 * (c**2 + _potential_derivative_at_state(coeff, x)))


def potential_integral(coeff: CoefficientModel, x: float) -> float:
    """H(x) = int_0^{S(x)} C(u) du by quadrature of C."""
    if coeff.constant:
        m, s = coeff.constant_values()
        return m * float(x) / s**2
    return _adaptive_integral(
        lambda u: drift_potential(coeff, u), 0.0, lamperti_transform(coeff, x), "H"
    )


def potential_bound(coeff: CoefficientModel, states: Sequence[float]) -> float:
    """M = max |g| over ``states``."""
    table = lamperti_table(coeff)
    g = table.potential(table.transform(np.asarray(states, dtype=float)))
    return float(np.max(np.abs(g)))


class LampertiTable:
    """Vectorized S, S^{-1}, H and g for one coefficient model.

    Constant-sigma models use closed forms. Otherwise S and the drift integral
    A(x) = int_0^x m / sigma**2 are accumulated cell by cell with 8-point
    Gauss-Legendre on a uniform grid over [-half_width, half_width] and
    interpolated by cubic splines; beyond the grid both are extended linearly
    with the end-point slopes.
    """

    def __init__(self, coeff: CoefficientModel, half_width: float = 40.0, cells: int = 8000):
        self.coeff = coeff
        self.half_width = float(half_width)
        self._sigma0 = float(coeff.sigma(0.0))
        if coeff.sigma_constant:
            self._nodes = None
            return

        nodes = np.linspace(-half_width, half_width, cells + 1)
        gl_x, gl_w = special.roots_legendre(8)
        left, right = nodes[:-1, None], nodes[1:, None]
        mid, half = 0.5 * (left + right), 0.5 * (right - left)
        points = mid + half * gl_x[None, :]
        inv_sigma = 1.0 / coeff.sigma(points)
        cell_s = (half * inv_sigma * gl_w).sum(axis=1)
        cell_a = (half * coeff.drift(points) * inv_sigma**2 * gl_w).sum(axis=1)
        centre = cells // 2
        s_nodes = np.concatenate([[0.0], np.cumsum(cell_s)])
        a_nodes = np.concatenate([[0.0], np.cumsum(cell_a)])
        s_nodes -= s_nodes[centre]
        a_nodes -= a_nodes[centre]

        self._nodes = nodes
        self._s_nodes = s_nodes
        self._s_spline = interpolate.CubicSpline(nodes, s_nodes)
        self._s_inverse = interpolate.CubicSpline(s_nodes, nodes)
        self._a_nodes = a_nodes
        self._a_spline = interpolate.CubicSpline(nodes, a_nodes)
        logger.debug(f"Built Lamperti table for {coeff.kind} with {cells} cells")

    def _extend(
        self, spline: interpolate.CubicSpline, knots: np.ndarray, values: np.ndarray,
        slope: Callable[[np.ndarray], np.ndarray], v: np.ndarray,
    ) -> np.ndarray:
        lo, hi = knots[0], knots[-1]
        inside = np.clip(v, lo, hi)
        out = spline(inside)
        below, above = v < lo, v > hi
        if np.any(below):
            out = np.where(below, values[0] + (v - lo) * slope(np.full_like(v, lo)), out)
        if np.any(above):
            out = np.where(above, values[-1] + (v - hi) * slope(np.full_like(v, hi)), out)
        return out

    def transform(self, x: ArrayLike) -> np.ndarray:
        """S(x)."""
        x = np.asarray(x, dtype=float)
        if self._nodes is None:
            return x / self._sigma0
        return self._extend(
            self._s_spline, self._nodes, self._s_nodes,
            lambda v: 1.0 / self.coeff.sigma(v), x,
        )

    def inverse(self, u: ArrayLike) -> np.ndarray:
        """S^{-1}(u)."""
        u = np.asarray(u, dtype=float)
        if self._nodes is None:
            return u * self._sigma0
        nodes = self._nodes
        return self._extend(
            self._s_inverse, self._s_nodes, nodes,
            lambda v: self.coeff.sigma(np.where(v <= self._s_nodes[0], nodes[0], nodes[-1])),
            u,
        )

    def drift_integral(self, x: ArrayLike) -> np.ndarray:
        """A(x) = int_0^x m / sigma**2."""
        x = np.asarray(x, dtype=float)
        if self._nodes is None:
            if self.coeff.constant:
                return float(self.coeff.drift(0.0)) * x / self._sigma0**2
            gl_x, gl_w = special.roots_legendre(16)
            half = 0.5 * x[..., None]
            pts = half * (1.0 + gl_x)
            return (half * self.coeff.drift(pts) * gl_w).sum(axis=-1) / self._sigma0**2
        return self._extend(
            self._a_spline, self._nodes, self._a_nodes,
            lambda v: self.coeff.drift(v) / self.coeff.sigma(v) ** 2, x,
        )

    def tilt(self, x: ArrayLike) -> np.ndarray:
        """H(x) = A(x) - log(sigma(x) / sigma(0)) / 2."""
        x = np.asarray(x, dtype=float)
        if self.coeff.sigma_constant:
            return self.drift_integral(x)
        return self.drift_integral(x) - 0.5 * np.log(self.coeff.sigma(x) / self._sigma0)

    def potential(self, u: ArrayLike) -> np.ndarray:
        """g(u), evaluated through S^{-1}."""
        x = self.inverse(u)
        c = _potential_at_state(self.coeff, x)
        return -0.5 * (c**2 + _potential_derivative_at_state(self.coeff, x))

    @property
    def constant_potential(self) -> Optional[float]:
        """The value of g when it does not depend on u, else None."""
        if self.coeff.constant:
            m, s = self.coeff.constant_values()
            return -0.5 * (m / s) ** 2
        return None


@lru_cache(maxsize=32)
def lamperti_table(coeff: CoefficientModel) -> LampertiTable:
    """Shared, read-only Lamperti table for ``coeff``."""
    return LampertiTable(coeff)
