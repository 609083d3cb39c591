"""
Correction terms of the chain-versus-diffusion expansion.

This package provides:
- Kernels and the time-space convolution between them
- The skewness and kurtosis operators and the frozen-generator term
- First and second corrections, numeric and closed form
- The nested skewness term on a per-node Chebyshev lattice
- The per-step likelihood ratios and fits of their bound shapes
"""

from src.edgeworth.corrections import (
    LOG_DENSITY_FLOOR,
    ExpansionContext,
    RatioBoundFit,
    SecondCorrection,
    first_correction,
    first_correction_closed,
    first_correction_hermite,
    first_ratio,
    first_ratio_closed,
    fit_ratio_bound,
    ratio_bound_shape,
    second_correction,
    second_correction_closed,
    second_ratio,
    second_ratio_closed,
)
from src.edgeworth.kernels import (
    ConvolutionKernel,
    DensityKernel,
    Kernel,
    QuadratureConfig,
    ScaledKernel,
    ZeroKernel,
    convolve_time_space,
)
from src.edgeworth.nested import NestedEstimate, nested_skewness_term
from src.edgeworth.operators import (
    GeneratorDifferenceKernel,
    frozen_generator_term,
    kurtosis_operator,
    skewness_operator,
)

__all__ = [
    'LOG_DENSITY_FLOOR',
    'ExpansionContext',
    'RatioBoundFit',
    'SecondCorrection',
    'first_correction',
    'first_correction_closed',
    'first_correction_hermite',
    'first_ratio',
    'first_ratio_closed',
    'fit_ratio_bound',
    'ratio_bound_shape',
    'second_correction',
    'second_correction_closed',
    'second_ratio',
    'second_ratio_closed',
    'ConvolutionKernel',
    'DensityKernel',
    'Kernel',
    'QuadratureConfig',
    'ScaledKernel',
    'ZeroKernel',
    'convolve_time_space',
    'NestedEstimate',
    'nested_skewness_term',
    'GeneratorDifferenceKernel',
    'frozen_generator_term',
    'kurtosis_operator',
    'skewness_operator',
]
