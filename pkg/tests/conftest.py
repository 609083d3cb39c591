"""Pytest fixtures for testing markovdiff."""

import os
from unittest.mock import patch

import pytest

from src.density.bridge_density import BridgeConfig
from src.density.chain import LatticeConfig
from src.edgeworth.corrections import ExpansionContext
from src.edgeworth.kernels import QuadratureConfig
from src.limits.parallel import MonteCarloConfig
from src.models.coefficients import ou_model, smooth_model, unit_model
from src.models.grid import GridSpec
from src.models.innovations import GaussianInnovation, MixtureInnovation


@pytest.fixture
def mock_env():
    """Isolate tests from MARKOVDIFF_* variables of the calling shell."""
    with patch.dict(os.environ, {
        "MARKOVDIFF_LOG_LEVEL": "WARNING",
        "MARKOVDIFF_WORKERS": "1",
    }):
        os.environ.pop("MARKOVDIFF_OUTPUT_DIR", None)
        yield


@pytest.fixture
def unit():
    """m = 1, sigma = 1."""
    return unit_model()


@pytest.fixture
def smooth():
    """m(x) = 0.3 sin x, sigma(x) = 1 + 0.3 tanh x."""
    return smooth_model(0.3, 0.3)


@pytest.fixture
def ou():
    return ou_model(1.0, 1.0)


@pytest.fixture
def gaussian():
    return GaussianInnovation()


@pytest.fixture
def skewed():
    """Unit-variance mixture with third moment 1."""
    return MixtureInnovation.from_moments(1.0)


@pytest.fixture
def mild_skew():
    """Unit-variance mixture with third moment 0.5."""
    return MixtureInnovation.from_moments(0.5)


@pytest.fixture
def symmetric():
    """Symmetric mixture: third moment 0, fourth moment 2.5."""
    return MixtureInnovation.from_moments(0.0)


@pytest.fixture
def standard_grid():
    """h = 0.001, k = 100, n = 10 (kh = 0.1)."""
    return GridSpec(h=0.001, k=100, n=10)


@pytest.fixture
def unit_context(unit, skewed, standard_grid):
    return ExpansionContext(coeff=unit, innov=skewed, grid=standard_grid)


@pytest.fixture
def small_bridge():
    """Cheap bridge expectation for state-dependent models."""
    return BridgeConfig(samples=32, mesh=16)


@pytest.fixture
def coarse_quad():
    """Unchecked low-resolution convolution rule."""
    return QuadratureConfig(time_nodes=16, space_nodes=32, check=False)


@pytest.fixture
def small_lattice():
    return LatticeConfig(max_cells=1024)


@pytest.fixture
def small_mc():
    return MonteCarloConfig(n_paths=400, seed=12345, chunk_size=100)
