"""Numeric validators for the standing model assumptions.

Checks are evaluated on a grid of sample states. Failures are recorded in the
report, never raised. The innovation-smoothness and coefficient-smoothness
checks are partial: they test finiteness and boundedness of what can be
evaluated, not the full regularity conditions.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List

import numpy as np

from src.models.coefficients import CoefficientModel
from src.models.grid import GridSpec
from src.models.innovations import InnovationModel, quadrature_moment
from src.models.transforms import potential_bound
from src.utils.errors import AssumptionError, NumericalError

# Get the module logger
logger = logging.getLogger(__name__)

CENTERED = "centered-innovations"
ELLIPTIC = "ellipticity"
INNOVATION_SMOOTH = "innovation-smoothness"
COEFFICIENT_SMOOTH = "coefficient-smoothness"
STEP_SCHEDULE = "step-schedule"


@dataclass(frozen=True)
class SampleGrid:
    """States (and tolerances) at which assumptions are checked."""

    lower: float = -5.0
    upper: float = 5.0
    points: int = 21
    moment_tol: float = 1e-8
    variance_tol: float = 1e-6
    derivative_tol: float = 1e-6
    derivative_bound: float = 1e6

    def states(self) -> np.ndarray:
        return np.linspace(self.lower, self.upper, self.points)


@dataclass(frozen=True)
class ScheduleConfig:
    """Constants of the step-size schedule check C_low^-1 k^-kappa < kh < C_up."""

    kappa: float = 0.19
    upper_constant: float = 1.0
    lower_constant: float = 10.0


@dataclass
class AssumptionCheck:
    """Outcome of a single assumption check."""

    name: str
    passed: bool
    partial: bool = False
    detail: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "partial": self.partial,
            "detail": self.detail,
        }


@dataclass
class ValidationReport:
    """Ordered collection of assumption checks."""

    checks: List[AssumptionCheck] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def failures(self) -> List[str]:
        return [check.name for check in self.checks if not check.passed]

    def get(self, name: str) -> AssumptionCheck:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    def require(self) -> None:
        """Raise if any check failed.

        Raises:
            AssumptionError: Listing the failed checks
        """
        if not self.all_passed:
            raise AssumptionError(f"Assumption checks failed: {', '.join(self.failures())}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "all_passed": self.all_passed,
            "checks": [check.to_dict() for check in self.checks],
        }


def _central_difference(fn: Any, x: np.ndarray, step: float = 1e-5) -> np.ndarray:
    return (fn(x + step) - fn(x - step)) / (2.0 * step)


def _check_centered(innov: InnovationModel, states: np.ndarray, grid: SampleGrid) -> AssumptionCheck:
    try:
        mass_err = max(abs(quadrature_moment(innov, x, 0) - 1.0) for x in states)
        mean_err = max(abs(quadrature_moment(innov, x, 1)) for x in states)
    except NumericalError as exc:
        return AssumptionCheck(CENTERED, False, detail={"error": str(exc)})
    passed = mass_err < grid.moment_tol and mean_err < grid.moment_tol
    return AssumptionCheck(
        CENTERED, passed, detail={"max_mass_error": mass_err, "max_abs_mean": mean_err}
    )


def _check_elliptic(
    coeff: CoefficientModel, innov: InnovationModel, states: np.ndarray, grid: SampleGrid
) -> AssumptionCheck:
    variance = coeff.sigma(states) ** 2
    slack = 1e-12 * max(1.0, coeff.sigma_upper)
    within = bool(
        coeff.sigma_lower > 0.0
        and np.all(variance >= coeff.sigma_lower - slack)
        and np.all(variance <= coeff.sigma_upper + slack)
    )
    mismatch = float(np.max(np.abs(innov.moment(states, 2) - variance)))
    consistent = mismatch <= grid.variance_tol * max(1.0, coeff.sigma_upper)
    return AssumptionCheck(
        ELLIPTIC,
        within and consistent,
        detail={
            "sigma_lower": coeff.sigma_lower,
            "sigma_upper": coeff.sigma_upper,
            "min_variance": float(np.min(variance)),
            "max_variance": float(np.max(variance)),
            "innovation_variance_mismatch": mismatch,
        },
    )


def _check_innovation_smooth(innov: InnovationModel, states: np.ndarray) -> AssumptionCheck:
    ys = np.linspace(-8.0, 8.0, 161)
    finite = True
    nonnegative = True
    for x in states:
        values = innov.density(x, ys)
        finite &= bool(np.all(np.isfinite(values)))
        nonnegative &= bool(np.all(values >= 0.0))
        # fourth differences stay finite for a smooth density
        step = 1e-2
        fourth = (
            innov.density(x, ys + 2 * step) - 4 * innov.density(x, ys + step) + 6 * values
            - 4 * innov.density(x, ys - step) + innov.density(x, ys - 2 * step)
        ) / step**4
        finite &= bool(np.all(np.isfinite(fourth)))
    mu4 = float(np.max(np.abs(innov.moment(states, 4))))
    passed = finite and nonnegative and np.isfinite(mu4)
    return AssumptionCheck(
        INNOVATION_SMOOTH,
        bool(passed),
        partial=True,
        detail={"finite": finite, "nonnegative": nonnegative, "max_mu4": mu4},
    )


def _check_coefficient_smooth(
    coeff: CoefficientModel, states: np.ndarray, grid: SampleGrid
) -> AssumptionCheck:
    values = {
        "drift": coeff.drift(states),
        "drift_d": coeff.drift_d(states),
        "drift_dd": coeff.drift_dd(states),
        "sigma": coeff.sigma(states),
        "sigma_d": coeff.sigma_d(states),
        "sigma_dd": coeff.sigma_dd(states),
    }
    sup = {name: float(np.max(np.abs(v))) for name, v in values.items()}
    bounded = all(np.isfinite(v) and v <= grid.derivative_bound for v in sup.values())

    fd_errors = {
        "drift_d": float(np.max(np.abs(coeff.drift_d(states) - _central_difference(coeff.drift, states)))),
        "sigma_d": float(np.max(np.abs(coeff.sigma_d(states) - _central_difference(coeff.sigma, states)))),
        "sigma_dd": float(np.max(np.abs(coeff.sigma_dd(states) - _central_difference(coeff.sigma_d, states)))),
    }
    exact = all(err < grid.derivative_tol for err in fd_errors.values())

    detail: Dict[str, Any] = {"sup": sup, "finite_difference_error": fd_errors}
    g_bounded = True
    if coeff.sigma_lower > 0.0:
        g_bound = potential_bound(coeff, states)
        detail["potential_bound"] = g_bound
        g_bounded = bool(np.isfinite(g_bound))
    return AssumptionCheck(
        COEFFICIENT_SMOOTH, bool(bounded and exact and g_bounded), partial=True, detail=detail
    )


def check_step_schedule(grid: GridSpec, schedule: ScheduleConfig = ScheduleConfig()) -> AssumptionCheck:
    """Check kh against the schedule k^(-kappa)/C_low < kh < C_up."""
    kh = grid.coarse_step
    floor = grid.k ** (-schedule.kappa) / schedule.lower_constant
    passed = floor < kh < schedule.upper_constant and schedule.kappa < 0.2
    return AssumptionCheck(
        STEP_SCHEDULE,
        bool(passed),
        detail={
            "kh": kh,
            "k_pow_minus_kappa": grid.k ** (-schedule.kappa),
            "lower_limit": floor,
            "upper_limit": schedule.upper_constant,
            "kappa": schedule.kappa,
        },
    )


def validate_assumptions(
    coeff: CoefficientModel,
    innov: InnovationModel,
    grid: GridSpec,
    sample_grid: SampleGrid = SampleGrid(),
    schedule: ScheduleConfig = ScheduleConfig(),
) -> ValidationReport:
    """Check a model pair and grid against the standing assumptions.

    Args:
        coeff: Coefficient model
        innov: Innovation model
        grid: Discretization grid
        sample_grid: Sample states and tolerances
        schedule: Constants of the step-size schedule check

    Returns:
        A report with one entry per assumption
    """
    states = sample_grid.states()
    report = ValidationReport(
        [
            _check_centered(innov, states, sample_grid),
            _check_elliptic(coeff, innov, states, sample_grid),
            _check_innovation_smooth(innov, states),
            _check_coefficient_smooth(coeff, states, sample_grid),
            check_step_schedule(grid, schedule),
        ]
    )
    logger.info(
        f"Validated {coeff.kind}/{innov.kind} on h={grid.h}, k={grid.k}, n={grid.n}: "
        f"{'all pass' if report.all_passed else 'failed ' + ', '.join(report.failures())}"
    )
    return report
