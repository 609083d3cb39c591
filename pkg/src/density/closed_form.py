"""Closed-form Gaussian densities and their Hermite derivatives."""

from enum import Enum
from typing import Tuple

import numpy as np
from numpy.polynomial import hermite_e
from numpy.typing import ArrayLike

from src.models.coefficients import CoefficientModel

LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


class DensityMethod(str, Enum):
    """How a density value was obtained."""

    CLOSED_FORM = "closed-form"
    QUADRATURE = "quadrature"
    BRIDGE_MC = "bridge-mc"
    CONVOLUTION_ORACLE = "convolution-oracle"


def hermite(order: int, w: ArrayLike) -> np.ndarray:
    """Probabilists' Hermite polynomial He_order(w)."""
    coefficients = np.zeros(order + 1)
    coefficients[order] = 1.0
    return hermite_e.hermeval(np.asarray(w, dtype=float), coefficients)


def gaussian_log_density(
    t: ArrayLike, x: ArrayLike, y: ArrayLike, drift: float = 1.0, sigma: float = 1.0
) -> np.ndarray:
    """log N(y; x + drift t, sigma**2 t)."""
    t = np.asarray(t, dtype=float)
    w = (np.asarray(y, dtype=float) - np.asarray(x, dtype=float) - drift * t) / (sigma * np.sqrt(t))
    return -0.5 * w**2 - LOG_SQRT_2PI - np.log(sigma * np.sqrt(t))


def standardized_increment(
    t: ArrayLike, x: ArrayLike, y: ArrayLike, drift: float = 1.0, sigma: float = 1.0
) -> np.ndarray:
    """w = (y - x - drift t) / (sigma sqrt(t))."""
    t = np.asarray(t, dtype=float)
    return (np.asarray(y, dtype=float) - np.asarray(x, dtype=float) - drift * t) / (sigma * np.sqrt(t))


def gaussian_derivative(
    t: ArrayLike,
    x: ArrayLike,
    y: ArrayLike,
    order: int,
    wrt: str = "y",
    drift: float = 1.0,
    sigma: float = 1.0,
) -> np.ndarray:
    """Spatial derivative of the constant-coefficient Gaussian density.

    With w the standardized increment and s = sigma sqrt(t),
    d^n/dy^n p = (-1)^n He_n(w) p / s^n and d^n/dx^n p = He_n(w) p / s^n.
    """
    t = np.asarray(t, dtype=float)
    w = standardized_increment(t, x, y, drift, sigma)
    p = np.exp(gaussian_log_density(t, x, y, drift, sigma))
    sign = (-1.0) ** order if wrt == "y" else 1.0
    return sign * hermite(order, w) * p / (sigma * np.sqrt(t)) ** order


def unit_drift_density(t: ArrayLike, x: ArrayLike, y: ArrayLike) -> np.ndarray:
    """Transition density of dY = dt + dW: N(y; x + t, t)."""
    return np.exp(gaussian_log_density(t, x, y, 1.0, 1.0))


def gaussian_proxy_density(coeff: CoefficientModel, t: ArrayLike, x: ArrayLike, y: ArrayLike) -> np.ndarray:
    """Gaussian proxy with coefficients taken at the end point y.

    (2 pi)^{-1/2} sigma(y)^{-1} t^{-1/2} exp(-(y - x - t m(y))^2 / (2 t sigma(y)^2))
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    s = coeff.sigma(y)
    exponent = -((y - np.asarray(x, dtype=float) - t * coeff.drift(y)) ** 2) / (2.0 * t * s**2)
    return np.exp(exponent - LOG_SQRT_2PI - np.log(s * np.sqrt(t)))


def ou_moments(t: ArrayLike, x: ArrayLike, theta: float, sigma: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Decay e^(-theta t), mean and standard deviation of the OU transition."""
    t = np.asarray(t, dtype=float)
    decay = np.exp(-theta * t)
    sd = sigma * np.sqrt(-np.expm1(-2.0 * theta * t) / (2.0 * theta))
    return decay, decay * np.asarray(x, dtype=float), sd


def ou_log_density(t: ArrayLike, x: ArrayLike, y: ArrayLike, theta: float, sigma: float) -> np.ndarray:
    """log N(y; x e^(-theta t), sigma^2 (1 - e^(-2 theta t)) / (2 theta))."""
    _, mean, sd = ou_moments(t, x, theta, sigma)
    w = (np.asarray(y, dtype=float) - mean) / sd
    return -0.5 * w**2 - LOG_SQRT_2PI - np.log(sd)


def ou_derivative(
    t: ArrayLike, x: ArrayLike, y: ArrayLike, order: int, wrt: str, theta: float, sigma: float
) -> np.ndarray:
    """Spatial derivative of the OU transition density.

    With w = (y - mean)/sd, d^n/dy^n p = (-1/sd)^n He_n(w) p and
    d^n/dx^n p = (e^(-theta t)/sd)^n He_n(w) p.
    """
    decay, mean, sd = ou_moments(t, x, theta, sigma)
    w = (np.asarray(y, dtype=float) - mean) / sd
    p = np.exp(-0.5 * w**2 - LOG_SQRT_2PI - np.log(sd))
    factor = -1.0 / sd if wrt == "y" else decay / sd
    return factor**order * hermite(order, w) * p
