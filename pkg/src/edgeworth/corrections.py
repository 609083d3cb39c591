"""First- and second-order correction terms and the ratios built from them.

The first correction is pi1 = p conv F1[p]. The second is

    pi2 = p conv F2[p] + p conv F1[p conv F1[p]] + 1/2 p conv (L_frozen^2 - L^2) p

The ratios delta1 = sqrt(h) pi1(kh)/p(kh) and delta2 = h pi2(kh)/p(kh) are the
per-step corrections of the chain likelihood against the diffusion. For
constant coefficients every term has a Hermite closed form, written in the
standardized increment w = (y - x - m t)/(sigma sqrt(t)).
"""

import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any, Dict, Iterable, Tuple

import numpy as np
from numpy.typing import ArrayLike

from src.density.bridge_density import BridgeConfig
from src.density.closed_form import gaussian_log_density, hermite, standardized_increment
from src.density.derivatives import DerivativeScheme, DiffusionDensity
from src.edgeworth.kernels import DensityKernel, QuadratureConfig, convolve_time_space
from src.edgeworth.nested import nested_skewness_term
from src.edgeworth.operators import frozen_generator_term, kurtosis_operator, skewness_operator
from src.models.coefficients import CoefficientModel
from src.models.grid import GridSpec
from src.models.innovations import InnovationModel
from src.models.validation import ScheduleConfig, check_step_schedule
from src.utils.errors import DensityUnderflowError, ModelError, QuadratureError

# Get the module logger
logger = logging.getLogger(__name__)

# exp(-700) is close to the smallest normal double.
LOG_DENSITY_FLOOR = -700.0


@dataclass
class ExpansionContext:
    """Everything a correction evaluation needs about one model and grid.

    Built once per run and shared; the density evaluator is created lazily.
    """

    coeff: CoefficientModel
    innov: InnovationModel
    grid: GridSpec
    quad: QuadratureConfig = field(default_factory=QuadratureConfig)
    scheme: DerivativeScheme = field(default_factory=DerivativeScheme)
    bridge: BridgeConfig = field(default_factory=BridgeConfig)
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    prefer_closed_form: bool = True

    def __post_init__(self) -> None:
        check = check_step_schedule(self.grid, self.schedule)
        self.schedule_satisfied = check.passed
        if not check.passed:
            logger.warning(
                f"Step schedule violated for h={self.grid.h}, k={self.grid.k}: "
                f"kh={check.detail['kh']:.4g} outside "
                f"({check.detail['lower_limit']:.4g}, {check.detail['upper_limit']:.4g})"
            )

    @cached_property
    def density(self) -> DiffusionDensity:
        return DiffusionDensity(self.coeff, self.bridge, self.scheme)

    @property
    def closed_form_available(self) -> bool:
        return self.coeff.constant and self.prefer_closed_form

    @property
    def spread_scale(self) -> float:
        return float(np.sqrt(self.coeff.sigma_upper))

    @property
    def skewness(self) -> float:
        return float(self.innov.skewness)

    @property
    def excess(self) -> float:
        """Standardized excess kurtosis of the innovation."""
        return float(self.innov.standardized_moment(4) - 3.0 * self.innov.standardized_moment(2) ** 2)

    def with_grid(self, grid: GridSpec) -> "ExpansionContext":
        """Same models and settings on another grid."""
        return replace(self, grid=grid)

    def describe(self) -> Dict[str, Any]:
        return {
            "coefficients": self.coeff.describe(),
            "innovation": self.innov.describe(),
            "grid": self.grid.to_dict(),
            "closed_form": self.closed_form_available,
        }


@dataclass
class SecondCorrection:
    """Term breakdown of the second correction."""

    kurtosis: np.ndarray
    nested: np.ndarray
    frozen: np.ndarray
    nested_converged: bool = True
    nested_level: int = 0

    @property
    def total(self) -> np.ndarray:
        return self.kurtosis + self.nested + self.frozen

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kurtosis": np.asarray(self.kurtosis).tolist(),
            "nested": np.asarray(self.nested).tolist(),
            "frozen": np.asarray(self.frozen).tolist(),
            "total": np.asarray(self.total).tolist(),
            "nested_converged": self.nested_converged,
            "nested_level": self.nested_level,
        }


def _require_constant(ctx: ExpansionContext) -> Tuple[float, float]:
    if not ctx.coeff.constant:
        raise ModelError(f"closed forms need constant coefficients, not {ctx.coeff.kind}")
    return ctx.coeff.constant_values()


def _broadcast(*arrays: ArrayLike) -> Tuple[np.ndarray, ...]:
    return tuple(np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in arrays)))


def first_correction(ctx: ExpansionContext, t: ArrayLike, x: ArrayLike, y: ArrayLike) -> np.ndarray:
    """pi1(t, x, y) = (p conv F1[p])(t, x, y) by quadrature.

    Raises:
        QuadratureError: If the convolution misses its tolerance
    """
    t, x, y = _broadcast(t, x, y)
    if ctx.innov.symmetric:
        return np.zeros(t.shape)
    p = DensityKernel(ctx.density)
    return convolve_time_space(p, skewness_operator(p, ctx.innov), t, x, y, ctx.quad, ctx.spread_scale)


def first_correction_closed(ctx: ExpansionContext, t: ArrayLike, x: ArrayLike, y: ArrayLike) -> np.ndarray:
    """-(mu3/6) t d^3/dy^3 p for constant coefficients.

    Equals (skew/6) He_3(w) p / sqrt(t) in the standardized increment w.

    Raises:
        ModelError: If the coefficients are not constant
    """
    drift, sigma = _require_constant(ctx)
    t, x, y = _broadcast(t, x, y)
    w = standardized_increment(t, x, y, drift, sigma)
    p = np.exp(gaussian_log_density(t, x, y, drift, sigma))
    return ctx.skewness / 6.0 * hermite(3, w) * p / np.sqrt(t)


def first_correction_hermite(mu3: float, t: ArrayLike, x: ArrayLike, y: ArrayLike) -> np.ndarray:
    """Unit-model first correction -(mu3/6) p He_3(z) / sqrt(t), z = sqrt(t) - (y-x)/sqrt(t)."""
    t, x, y = _broadcast(t, x, y)
    root = np.sqrt(t)
    z = root - (y - x) / root
    p = np.exp(gaussian_log_density(t, x, y))
    return -mu3 / 6.0 * p * hermite(3, z) / root


def _nested_term(ctx: ExpansionContext, t: np.ndarray, x: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, bool, int]:
    """p conv F1[p conv F1[p]], refined until the value settles."""
    estimate = nested_skewness_term(ctx.density, ctx.innov, t, x, y, ctx.quad, ctx.spread_scale)
    if estimate.converged:
        return estimate.value, True, estimate.level
    if ctx.quad.check:
        raise QuadratureError(
            f"nested convolution still moved {estimate.change:.3g} after "
            f"{ctx.quad.nested_max_refinements} refinements",
            achieved_error=estimate.change,
            tolerance=ctx.quad.nested_rtol,
        )
    logger.warning(f"Nested convolution unconverged, last relative change {estimate.change:.3g}")
    return estimate.value, False, estimate.level


def _frozen_term(ctx: ExpansionContext, t: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    value = np.zeros(t.shape)
    if ctx.coeff.constant:
        return value
    # The freezing point is the start point, so group evaluations by (t, x).
    pairs = np.stack([t.ravel(), x.ravel()], axis=1)
    for t0, x0 in np.unique(pairs, axis=0):
        mask = (t == t0) & (x == x0)
        value[mask] = frozen_generator_term(ctx.density, t0, x0, y[mask], ctx.quad, ctx.spread_scale)
    return value


def second_correction(ctx: ExpansionContext, t: ArrayLike, x: ArrayLike, y: ArrayLike) -> SecondCorrection:
    """pi2(t, x, y) by quadrature, with its three terms reported separately.

    Raises:
        QuadratureError: If a convolution misses its tolerance or the nested
            term does not settle within the configured refinements
    """
    t, x, y = _broadcast(t, x, y)
    p = DensityKernel(ctx.density)
    kurtosis = convolve_time_space(p, kurtosis_operator(p, ctx.innov), t, x, y, ctx.quad, ctx.spread_scale)
    if ctx.innov.symmetric:
        nested, converged, level = np.zeros(t.shape), True, 0
    else:
        nested, converged, level = _nested_term(ctx, t, x, y)
    return SecondCorrection(
        kurtosis=kurtosis,
        nested=nested,
        frozen=_frozen_term(ctx, t, x, y),
        nested_converged=converged,
        nested_level=level,
    )


def second_correction_closed(
    ctx: ExpansionContext, t: ArrayLike, x: ArrayLike, y: ArrayLike
) -> SecondCorrection:
    """(e/24) t d^4/dy^4 p + (mu3/6)^2 (t^2/2) d^6/dy^6 p for constant coefficients.

    In standardized moments this is p (excess He_4(w) + skew^2 He_6(w)/3)/(24 t).

    Raises:
        ModelError: If the coefficients are not constant
    """
    drift, sigma = _require_constant(ctx)
    t, x, y = _broadcast(t, x, y)
    w = standardized_increment(t, x, y, drift, sigma)
    p = np.exp(gaussian_log_density(t, x, y, drift, sigma))
    return SecondCorrection(
        kurtosis=ctx.excess / 24.0 * hermite(4, w) * p / t,
        nested=ctx.skewness**2 / 72.0 * hermite(6, w) * p / t,
        frozen=np.zeros(t.shape),
    )


def first_ratio_closed(mu3: float, k: int, w: ArrayLike) -> np.ndarray:
    """delta1 = mu3 He_3(w) / (6 sqrt(k))."""
    return mu3 * hermite(3, w) / (6.0 * np.sqrt(k))


def second_ratio_closed(mu3: float, excess: float, k: int, w: ArrayLike) -> np.ndarray:
    """delta2 = (e He_4(w)/24 + mu3^2 He_6(w)/72) / k."""
    return (excess * hermite(4, w) / 24.0 + mu3**2 * hermite(6, w) / 72.0) / k


def _checked_log_density(ctx: ExpansionContext, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    kh = ctx.grid.coarse_step
    log_p = ctx.density.log_value(kh, x, y)
    if np.any(log_p < LOG_DENSITY_FLOOR):
        worst = float(np.min(log_p))
        raise DensityUnderflowError(
            f"p(kh, x, y) underflows: log p = {worst:.1f} below {LOG_DENSITY_FLOOR}",
            log_density=worst,
        )
    return log_p


def _closed_increment(ctx: ExpansionContext, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    drift, sigma = ctx.coeff.constant_values()
    return standardized_increment(ctx.grid.coarse_step, x, y, drift, sigma)


def first_ratio(ctx: ExpansionContext, x: ArrayLike, y: ArrayLike) -> np.ndarray:
    """delta1(x, y) = sqrt(h) pi1(kh, x, y) / p(kh, x, y).

    Uses the closed form when the coefficients are constant, otherwise the
    quadrature correction divided in log space.

    Raises:
        DensityUnderflowError: If p(kh, x, y) is below the representable floor
    """
    x, y = _broadcast(x, y)
    log_p = _checked_log_density(ctx, x, y)
    if ctx.innov.symmetric:
        return np.zeros(x.shape)
    if ctx.closed_form_available:
        return first_ratio_closed(ctx.skewness, ctx.grid.k, _closed_increment(ctx, x, y))
    correction = first_correction(ctx, ctx.grid.coarse_step, x, y)
    return np.sqrt(ctx.grid.h) * correction * np.exp(-log_p)


def second_ratio(ctx: ExpansionContext, x: ArrayLike, y: ArrayLike) -> np.ndarray:
    """delta2(x, y) = h pi2(kh, x, y) / p(kh, x, y).

    Raises:
        DensityUnderflowError: If p(kh, x, y) is below the representable floor
    """
    x, y = _broadcast(x, y)
    log_p = _checked_log_density(ctx, x, y)
    if ctx.closed_form_available:
        return second_ratio_closed(ctx.skewness, ctx.excess, ctx.grid.k, _closed_increment(ctx, x, y))
    correction = second_correction(ctx, ctx.grid.coarse_step, x, y).total
    return ctx.grid.h * correction * np.exp(-log_p)


@dataclass
class RatioBoundFit:
    """Fitted constants of a ratio bound shape, one per k."""

    order: int
    constants: Dict[int, float]

    @property
    def constant(self) -> float:
        """A single constant valid for every fitted k."""
        return max(self.constants.values())

    @property
    def spread(self) -> float:
        """Largest over smallest per-k constant."""
        values = [c for c in self.constants.values() if c > 0.0]
        return max(values) / min(values) if values else 1.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "order": self.order,
            "constants": {str(k): c for k, c in self.constants.items()},
            "constant": self.constant,
            "spread": self.spread,
        }


def ratio_bound_shape(order: int, k: int, r: ArrayLike) -> np.ndarray:
    """Envelope of |delta_order| in r = (y - x)/sqrt(kh).

    (1 + |r|)^3 / sqrt(k) for the first ratio, (1 + |r|^7) / k for the second.
    """
    r = np.abs(np.asarray(r, dtype=float))
    if order == 1:
        return (1.0 + r) ** 3 / np.sqrt(k)
    if order == 2:
        return (1.0 + r**7) / k
    raise ModelError(f"Ratio order {order} is not supported")


def fit_ratio_bound(
    order: int,
    mu3: float,
    excess: float,
    k_values: Iterable[int],
    kh: float = 0.1,
    span: float = 6.0,
    points: int = 241,
    drift: float = 1.0,
    sigma: float = 1.0,
) -> RatioBoundFit:
    """Fit the smallest constant C_k with |delta| <= C_k * shape on a grid of end points.

    Args:
        order: 1 or 2
        mu3: Standardized third moment
        excess: Standardized excess kurtosis
        k_values: Refinement factors to fit
        kh: Coarse step, held fixed across k
        span: Half-width of the range of r = (y - x)/sqrt(kh)
        points: Number of sampled r values
        drift: Constant drift of the model
        sigma: Constant diffusion of the model

    Returns:
        The per-k constants
    """
    r = np.linspace(-span, span, points)
    w = (r - drift * np.sqrt(kh)) / sigma
    constants = {}
    for k in k_values:
        if order == 1:
            ratio = first_ratio_closed(mu3, k, w)
        else:
            ratio = second_ratio_closed(mu3, excess, k, w)
        constants[int(k)] = float(np.max(np.abs(ratio) / ratio_bound_shape(order, k, r)))
    fit = RatioBoundFit(order=order, constants=constants)
    logger.info(f"Ratio bound order {order}: C = {fit.constant:.4g}, spread {fit.spread:.3f}")
    return fit
