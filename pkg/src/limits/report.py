"""Experiment reports and their canonical JSON form."""

import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

# Get the module logger
logger = logging.getLogger(__name__)


def plain(value: Any) -> Any:
    """Convert numpy scalars and arrays inside nested containers to JSON types."""
    if isinstance(value, dict):
        return {str(key): plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(item) for item in value]
    if isinstance(value, np.ndarray):
        return plain(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if np.isfinite(value) else str(value)
    return value


@dataclass(frozen=True)
class Estimate:
    """A Monte-Carlo or numerical statistic with its standard error and sample size."""

    value: float
    stderr: float
    n: int

    @classmethod
    def from_sample(cls, sample: np.ndarray) -> "Estimate":
        """Sample mean with standard error std/sqrt(N)."""
        sample = np.asarray(sample, dtype=float).ravel()
        n = sample.size
        stderr = float(np.std(sample, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
        return cls(float(np.mean(sample)), stderr, int(n))

    @classmethod
    def variance_of(cls, sample: np.ndarray) -> "Estimate":
        """Sample variance with the standard error sqrt((m4 - s^4)/N)."""
        sample = np.asarray(sample, dtype=float).ravel()
        n = sample.size
        variance = float(np.var(sample, ddof=1))
        m4 = float(np.mean((sample - sample.mean()) ** 4))
        stderr = float(np.sqrt(max(m4 - variance**2, 0.0) / n))
        return cls(variance, stderr, int(n))

    @classmethod
    def exact(cls, value: float, n: int = 1) -> "Estimate":
        """A deterministic value."""
        return cls(float(value), 0.0, int(n))

    def to_dict(self) -> Dict[str, Any]:
        return {"value": plain(self.value), "stderr": plain(self.stderr), "n": self.n}


@dataclass
class ExperimentReport:
    """Design point, named estimates and reference targets of one experiment."""

    experiment: str
    design: Dict[str, Any]
    estimates: Dict[str, Estimate] = field(default_factory=dict)
    targets: Dict[str, float] = field(default_factory=dict)
    regime: Optional[str] = None
    seeds: Dict[str, int] = field(default_factory=dict)
    details: Dict[str, Any] = field(default_factory=dict)
    wall_clock: Optional[float] = None

    def add(self, name: str, estimate: Estimate) -> Estimate:
        self.estimates[name] = estimate
        return estimate

    def value(self, name: str) -> float:
        """Value of a named estimate.

        Raises:
            KeyError: If no estimate has that name
        """
        if name not in self.estimates:
            raise KeyError(f"{self.experiment} has no estimate {name}")
        return self.estimates[name].value

    def to_dict(self, include_timing: bool = False) -> Dict[str, Any]:
        data = {
            "experiment": self.experiment,
            "design": plain(self.design),
            "estimates": {name: est.to_dict() for name, est in self.estimates.items()},
            "targets": plain(self.targets),
            "regime": self.regime,
            "seeds": plain(self.seeds),
            "details": plain(self.details),
        }
        if include_timing and self.wall_clock is not None:
            data["wall_clock_seconds"] = self.wall_clock
        return data


def report_json(data: Dict[str, Any]) -> str:
    """Canonical JSON: sorted keys, two-space indent, trailing newline."""
    return json.dumps(plain(data), sort_keys=True, indent=2) + "\n"
