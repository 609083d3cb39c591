"""
Model layer of the markovdiff toolkit.

This package provides:
- Coefficient models (drift m, diffusion sigma and analytic derivatives)
- Innovation families q(x, .) with closed-form moments and base-randomness samplers
- The Lamperti transform and the potentials C, g, H of the bridge representation
- The (h, k, n) grid with its regime classification
- Numeric validators for the model assumptions
- A registry that builds models from configuration
"""

from src.models.coefficients import (
    CoefficientModel,
    constant_model,
    custom_model,
    ou_model,
    smooth_model,
    unit_model,
    zero_drift_model,
)
from src.models.grid import GridSpec, Regime, classify_regime
from src.models.innovations import (
    GaussianInnovation,
    InnovationModel,
    MixtureInnovation,
    innovation_moment,
    mixture_parameters_from_moments,
    quadrature_moment,
)
from src.models.registry import ModelRegistry
from src.models.transforms import (
    LampertiTable,
    bridge_potential,
    drift_potential,
    drift_potential_derivative,
    inverse_lamperti,
    lamperti_table,
    lamperti_transform,
    potential_bound,
    potential_integral,
)
from src.models.validation import (
    AssumptionCheck,
    SampleGrid,
    ScheduleConfig,
    ValidationReport,
    check_step_schedule,
    validate_assumptions,
)

__all__ = [
    'CoefficientModel',
    'constant_model',
    'custom_model',
    'ou_model',
    'smooth_model',
    'unit_model',
    'zero_drift_model',
    'GridSpec',
    'Regime',
    'classify_regime',
    'GaussianInnovation',
    'InnovationModel',
    'MixtureInnovation',
    'innovation_moment',
    'mixture_parameters_from_moments',
    'quadrature_moment',
    'ModelRegistry',
    'LampertiTable',
    'bridge_potential',
    'drift_potential',
    'drift_potential_derivative',
    'inverse_lamperti',
    'lamperti_table',
    'lamperti_transform',
    'potential_bound',
    'potential_integral',
    'AssumptionCheck',
    'SampleGrid',
    'ScheduleConfig',
    'ValidationReport',
    'check_step_schedule',
    'validate_assumptions',
]
