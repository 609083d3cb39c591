"""
Transition densities for the markovdiff toolkit.

This package provides:
- Closed-form Gaussian and Ornstein-Uhlenbeck densities with Hermite-polynomial derivatives
- The Gaussian proxy with end-point coefficients
- The Lamperti Gaussian factor and the Brownian-bridge density representation
- A vectorized density evaluator with analytic or finite-difference derivatives
- The chain one-step kernel and a lattice convolution oracle for k-step chain densities
"""

from src.density.bridge_density import (
    BridgeConfig,
    DensityEstimate,
    bridge_density,
    bridge_factor,
    lamperti_gaussian_factor,
    log_lamperti_gaussian_factor,
)
from src.density.chain import (
    ChainLattice,
    LatticeConfig,
    chain_step_kernel,
    chain_transition_density,
)
from src.density.closed_form import (
    DensityMethod,
    gaussian_derivative,
    gaussian_log_density,
    gaussian_proxy_density,
    hermite,
    ou_derivative,
    ou_log_density,
    ou_moments,
    standardized_increment,
    unit_drift_density,
)
from src.density.derivatives import (
    Derivative,
    DerivativeScheme,
    DiffusionDensity,
    density_derivative,
    derivative_bound_ratios,
)

__all__ = [
    'BridgeConfig',
    'DensityEstimate',
    'bridge_density',
    'bridge_factor',
    'lamperti_gaussian_factor',
    'log_lamperti_gaussian_factor',
    'ChainLattice',
    'LatticeConfig',
    'chain_step_kernel',
    'chain_transition_density',
    'DensityMethod',
    'gaussian_derivative',
    'gaussian_log_density',
    'gaussian_proxy_density',
    'hermite',
    'ou_derivative',
    'ou_log_density',
    'ou_moments',
    'standardized_increment',
    'unit_drift_density',
    'Derivative',
    'DerivativeScheme',
    'DiffusionDensity',
    'density_derivative',
    'derivative_bound_ratios',
]
