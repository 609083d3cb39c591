"""
markovdiff - Markov chains observed on a coarse grid and their diffusion limits

This package contains the numerical apparatus for comparing a fine-grid Markov
chain, observed every k steps, with the diffusion it approximates:
- Coefficient and innovation models with assumption validators
- Reproducible simulation of chains, Euler schemes and exact diffusions
- Transition densities, their derivatives and a lattice oracle for chain densities
- First- and second-order correction terms and the per-step likelihood ratios
- Monte-Carlo experiments on the convergence and sharpness regimes

The command-line front end in ``src.cli`` drives every experiment from a JSON
run configuration.
"""

__version__ = "0.1.0"
