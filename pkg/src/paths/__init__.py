"""
Path simulation for the markovdiff toolkit.

This package provides:
- Reproducible per-path random substreams (Philox keyed by seed and path id)
- The fine-grid Markov chain and its subsampling to the observation grid
- Euler-Maruyama paths and exact coarse diffusion paths (constant coefficients, OU)
- Brownian bridges for the bridge representation of the transition density
- CSV export of simulated paths
"""

from src.paths.bridge import simulate_bridge, simulate_bridges
from src.paths.export import write_paths_csv
from src.paths.simulate import (
    PathSample,
    simulate_chain,
    simulate_chain_batch,
    simulate_coarse_diffusion_batch,
    simulate_diffusion_euler,
    simulate_diffusion_exact_unit,
    simulate_euler_batch,
    subsample,
)
from src.paths.streams import (
    PathOrigin,
    RandomStream,
    base_noise,
    base_normals,
    stacked_noise,
    stacked_normals,
)

__all__ = [
    'simulate_bridge',
    'simulate_bridges',
    'write_paths_csv',
    'PathSample',
    'simulate_chain',
    'simulate_chain_batch',
    'simulate_coarse_diffusion_batch',
    'simulate_diffusion_euler',
    'simulate_diffusion_exact_unit',
    'simulate_euler_batch',
    'subsample',
    'PathOrigin',
    'RandomStream',
    'base_noise',
    'base_normals',
    'stacked_noise',
    'stacked_normals',
]
