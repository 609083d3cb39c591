"""Exception hierarchy shared by every markovdiff package.

Configuration and model problems derive from ``ValueError`` so callers that
only know the standard library still catch them; numerical failures derive
from ``ArithmeticError``. The CLI maps the two branches to exit codes 2 and 3.
"""

from typing import Optional


class MarkovDiffError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(MarkovDiffError, ValueError):
    """A run configuration failed schema validation."""


class ModelError(MarkovDiffError, ValueError):
    """A model is unsupported, infeasible or used outside its domain."""


class AssumptionError(MarkovDiffError):
    """Model assumptions were required to hold but at least one failed."""


class NumericalError(MarkovDiffError, ArithmeticError):
    """A numerical routine could not reach its tolerance."""


class QuadratureError(NumericalError):
    """Quadrature did not converge to the requested tolerance."""

    def __init__(
        self, message: str, achieved_error: float, tolerance: Optional[float] = None
    ):
        super().__init__(message)
        self.achieved_error = achieved_error
        self.tolerance = tolerance


class LatticeLeakError(NumericalError):
    """Probability mass escaped the spatial lattice of the convolution oracle."""

    def __init__(self, message: str, leaked_mass: float):
        super().__init__(message)
        self.leaked_mass = leaked_mass


class DensityUnderflowError(NumericalError):
    """A transition density fell below the representable floor."""

    def __init__(self, message: str, log_density: float):
        super().__init__(message)
        self.log_density = log_density


class DerivativeStepError(NumericalError):
    """A finite-difference step is too coarse for the time scale."""

    def __init__(self, message: str, step: float, t: float):
        super().__init__(message)
        self.step = step
        self.t = t
