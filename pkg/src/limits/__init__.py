"""
Statistical layer of the chain-to-diffusion limit.

This package provides:
- Deterministic chunked Monte-Carlo evaluation over paths
- Correction sequences along diffusion paths and the likelihood product
- Distance estimates, scaling and orthogonality diagnostics, the CLT experiment
- The lattice remainder ladder and the Euler consistency benchmark
- Experiment reports with canonical JSON serialization
"""

from src.limits.experiments import (
    clt_experiment,
    energy_distance,
    estimate_energy_proxy,
    estimate_first_order_distance,
    estimate_second_order_distance,
    euler_consistency_experiment,
    gaussian_moment_constant,
    hermite_moment_constant,
    martingale_diagnostics,
    moment_scaling_diagnostics,
    quantile_estimate,
    regime_ladder,
    remainder_ladder_check,
    schedule_ladder,
    second_order_scaling_diagnostics,
    sup_scaling_diagnostics,
)
from src.limits.increments import (
    IncrementSequence,
    correction_increments,
    likelihood_product,
    path_correction_increments,
)
from src.limits.parallel import MonteCarloConfig, map_path_chunks
from src.limits.report import Estimate, ExperimentReport, plain, report_json

__all__ = [
    'clt_experiment',
    'energy_distance',
    'estimate_energy_proxy',
    'estimate_first_order_distance',
    'estimate_second_order_distance',
    'euler_consistency_experiment',
    'gaussian_moment_constant',
    'hermite_moment_constant',
    'martingale_diagnostics',
    'moment_scaling_diagnostics',
    'quantile_estimate',
    'regime_ladder',
    'remainder_ladder_check',
    'schedule_ladder',
    'second_order_scaling_diagnostics',
    'sup_scaling_diagnostics',
    'IncrementSequence',
    'correction_increments',
    'likelihood_product',
    'path_correction_increments',
    'MonteCarloConfig',
    'map_path_chunks',
    'Estimate',
    'ExperimentReport',
    'plain',
    'report_json',
]
