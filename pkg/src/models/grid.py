"""Time discretization triple (h, k, n) and the asymptotic regime it targets."""

import numbers
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional

from src.utils.errors import ConfigError


class Regime(str, Enum):
    """Which limit the ratio n/k is heading to.

    VANISHING_RATIO: n/k -> 0, where the chain and the diffusion merge.
    CRITICAL_RATIO: n/k -> c > 0, where the skewness correction survives.
    """

    VANISHING_RATIO = "vanishing-ratio"
    CRITICAL_RATIO = "critical-ratio"
    NEITHER = "neither"


@dataclass(frozen=True)
class GridSpec:
    """Fine step h, subsampling factor k and number of observations n."""

    h: float
    k: int
    n: int

    def __post_init__(self) -> None:
        if not isinstance(self.k, numbers.Integral) or isinstance(self.k, bool) or self.k < 1:
            raise ConfigError(f"grid.k must be a positive integer, got {self.k!r}")
        if not isinstance(self.n, numbers.Integral) or isinstance(self.n, bool) or self.n < 1:
            raise ConfigError(f"grid.n must be a positive integer, got {self.n!r}")
        if not self.h > 0.0:
            raise ConfigError(f"grid.h must be positive, got {self.h!r}")

    @classmethod
    def from_coarse_step(cls, coarse_step: float, k: int, n: int) -> "GridSpec":
        """Grid with kh fixed to ``coarse_step``."""
        return cls(h=coarse_step / k, k=k, n=n)

    @property
    def coarse_step(self) -> float:
        """kh, the observation spacing."""
        return self.h * self.k

    @property
    def horizon(self) -> float:
        """T = nkh."""
        return self.h * self.k * self.n

    @property
    def fine_steps(self) -> int:
        return self.n * self.k

    def to_dict(self) -> Dict[str, Any]:
        return {"h": self.h, "k": self.k, "n": self.n}


def classify_regime(
    grid: GridSpec,
    c_target: Optional[float] = None,
    rel_tol: float = 0.1,
    small_ratio: float = 0.25,
) -> Regime:
    """Tag a grid with the regime its n/k ratio represents.

    Args:
        grid: Grid to classify
        c_target: Declared limit of n/k for critical-ratio designs
        rel_tol: Relative tolerance for matching ``c_target``
        small_ratio: Ratios at or below this count as vanishing

    Returns:
        The regime tag
    """
    ratio = grid.n / grid.k
    if c_target is not None and c_target > 0 and abs(ratio - c_target) <= rel_tol * c_target:
        return Regime.CRITICAL_RATIO
    if ratio <= small_ratio:
        return Regime.VANISHING_RATIO
    return Regime.NEITHER
