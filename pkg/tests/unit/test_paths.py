"""Unit tests for the paths package."""

import io

import numpy as np
import pytest
from scipy import stats

from src.models.coefficients import zero_drift_model
from src.models.grid import GridSpec
from src.models.innovations import GaussianInnovation
from src.paths.bridge import simulate_bridge, simulate_bridges
from src.paths.export import PATH_COLUMNS, write_paths_csv
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
from src.paths.streams import PathOrigin, RandomStream, base_noise, stacked_normals
from src.utils.errors import ConfigError, ModelError


class TestRandomStreams:
    """Tests for the per-path substreams."""

    def test_same_stream_same_bits(self):
        """Test a stream replays identically."""
        stream = RandomStream(12345, 7)
        first = stream.generator().standard_normal(5)
        np.testing.assert_array_equal(first, stream.generator().standard_normal(5))

    def test_substreams_differ(self):
        """Test distinct stream ids give distinct draws."""
        a = RandomStream(12345, 0).generator().standard_normal(5)
        b = RandomStream(12345, 1).generator().standard_normal(5)
        assert not np.allclose(a, b)

    def test_stacked_rows_match_single_streams(self):
        """Test row j of a stacked draw is substream j."""
        stacked = stacked_normals(3, [4, 9], 6)
        np.testing.assert_array_equal(stacked[1], RandomStream(3, 9).generator().standard_normal(6))

    def test_invalid_seed(self):
        """Test seeds outside the unsigned 64-bit range are rejected."""
        with pytest.raises(ConfigError):
            RandomStream(-1)
        with pytest.raises(ConfigError):
            RandomStream(2**64)

    def test_noise_order(self):
        """Test uniforms are drawn before normals."""
        uniforms, normals = base_noise(RandomStream(1, 2), 4)
        rng = RandomStream(1, 2).generator()
        np.testing.assert_array_equal(uniforms, rng.random(4))
        np.testing.assert_array_equal(normals, rng.standard_normal(4))


class TestChainSimulation:
    """Tests for the fine-grid chain."""

    def test_batch_row_equals_single_path(self, smooth, mild_skew):
        """Test batch and single-path simulation read the same substream."""
        grid = GridSpec(0.01, 5, 2)
        single = simulate_chain(smooth, mild_skew, 0.2, grid, RandomStream(99, 3))
        batch = simulate_chain_batch(smooth, mild_skew, 0.2, grid, 99, [1, 3])
        np.testing.assert_array_equal(single.values, batch[1])
        assert single.origin == PathOrigin.CHAIN
        assert len(single) == grid.fine_steps + 1

    def test_one_step_mean(self, unit, gaussian):
        """Test one-step increments have mean m h within a 4-sigma band."""
        grid = GridSpec(0.01, 1, 1)
        n_paths = 20000
        values = simulate_chain_batch(unit, gaussian, 0.0, grid, 12345, range(n_paths))
        increments = values[:, 1] - values[:, 0]
        assert abs(increments.mean() - 0.01) < 4.0 * np.sqrt(0.01 / n_paths)

    def test_one_step_moments_of_skewed_chain(self, unit, skewed):
        """Test sqrt(h)-scaled increments carry the innovation's variance and third moment."""
        grid = GridSpec(0.01, 1, 1)
        n_paths = 20000
        values = simulate_chain_batch(unit, skewed, 0.0, grid, 12345, range(n_paths))
        xi = (values[:, 1] - values[:, 0] - 0.01) / 0.1
        assert abs(xi.var() - 1.0) < 4.0 * np.sqrt(2.0 / n_paths) * 2.0
        assert abs(np.mean(xi**3) - 1.0) < 0.25

    def test_state_dependent_one_step_variance(self, smooth):
        """Test one chain step from a fixed x has variance sigma(x)^2 h."""
        x0, h, n_paths = 0.8, 0.01, 20000
        innov = GaussianInnovation(scale=smooth.sigma)
        values = simulate_chain_batch(smooth, innov, x0, GridSpec(h, 1, 1), 404, range(n_paths))
        increments = values[:, 1] - values[:, 0]
        expected = float(smooth.sigma(x0)) ** 2 * h
        assert abs(increments.var(ddof=1) - expected) < 4.0 * expected * np.sqrt(2.0 / n_paths)
        assert abs(increments.mean() - float(smooth.drift(x0)) * h) < 4.0 * np.sqrt(expected / n_paths)

    def test_subsample(self, unit, gaussian):
        """Test subsampling keeps every k-th point."""
        grid = GridSpec(0.01, 4, 3)
        path = simulate_chain(unit, gaussian, 0.0, grid, RandomStream(5))
        coarse = subsample(path, 4)
        assert len(coarse) == 4
        np.testing.assert_array_equal(coarse.values, path.values[::4])
        with pytest.raises(ModelError):
            subsample(path, 5)


class TestDiffusionSimulation:
    """Tests for Euler and exact diffusion paths."""

    def test_euler_unit_increments(self, unit):
        """Test Euler increments of the unit model are N(d, d)."""
        step, n_paths = 0.05, 20000
        values = simulate_euler_batch(unit, 0.0, step, 1, 7, range(n_paths))
        increments = values[:, 1] - values[:, 0]
        band = 4.0 * step * np.sqrt(2.0 / n_paths)
        assert abs(increments.var(ddof=1) - step) < band
        assert abs(increments.mean() - step) < 4.0 * np.sqrt(step / n_paths)

    def test_euler_single_matches_batch(self, ou):
        """Test the single-path Euler simulator against the batch form."""
        single = simulate_diffusion_euler(ou, 1.0, 0.01, 20, RandomStream(4, 2))
        batch = simulate_euler_batch(ou, 1.0, 0.01, 20, 4, [2])
        np.testing.assert_array_equal(single.values, batch[0])
        assert single.origin == PathOrigin.EULER

    def test_exact_unit_increments(self, unit):
        """Test exact coarse increments have mean and variance kh."""
        grid = GridSpec(0.001, 100, 4)
        values = simulate_coarse_diffusion_batch(unit, 0.0, grid, 11, range(5000))
        increments = np.diff(values, axis=1).ravel()
        assert abs(increments.mean() - 0.1) < 4.0 * np.sqrt(0.1 / increments.size)
        assert abs(increments.var(ddof=1) - 0.1) < 4.0 * 0.1 * np.sqrt(2.0 / increments.size)

    def test_exact_unit_path(self, unit):
        """Test the single-path exact simulator."""
        grid = GridSpec(0.001, 100, 4)
        path = simulate_diffusion_exact_unit(0.0, grid, RandomStream(11, 2), unit)
        batch = simulate_coarse_diffusion_batch(unit, 0.0, grid, 11, [2])
        np.testing.assert_array_equal(path.values, batch[0])
        np.testing.assert_allclose(path.times, [0.0, 0.1, 0.2, 0.3, 0.4])

    def test_exact_unit_one_step_law(self):
        """Test one exact unit step from x is N(x + kh, kh) by a KS test over 10^4 draws."""
        grid = GridSpec.from_coarse_step(0.1, 10, 1)
        draws = np.array(
            [simulate_diffusion_exact_unit(0.5, grid, RandomStream(2024, i)).values[1] for i in range(10000)]
        )
        assert stats.kstest(draws, "norm", args=(0.6, np.sqrt(0.1))).pvalue > 0.01

    def test_euler_matches_exact_unit(self, unit):
        """Test Euler end points of the unit model share the law of exact draws (two-sample KS)."""
        n_paths = 10000
        euler = simulate_euler_batch(unit, 0.0, 0.01, 10, 31, range(n_paths))[:, -1]
        grid = GridSpec.from_coarse_step(0.1, 10, 1)
        exact = simulate_coarse_diffusion_batch(unit, 0.0, grid, 32, range(n_paths))[:, -1]
        assert stats.ks_2samp(euler, exact).pvalue > 0.01

    def test_exact_unit_rejects_other_models(self):
        """Test the exact unit simulator refuses a non-unit model."""
        with pytest.raises(ModelError):
            simulate_diffusion_exact_unit(0.0, GridSpec(0.01, 10, 2), RandomStream(1), zero_drift_model())

    def test_ou_stationary_variance(self, ou):
        """Test exact OU transitions relax to variance sigma^2 / (2 theta)."""
        grid = GridSpec(0.5, 1, 20)
        values = simulate_coarse_diffusion_batch(ou, 0.0, grid, 3, range(10000))
        assert abs(values[:, -1].var(ddof=1) - 0.5) < 4.0 * 0.5 * np.sqrt(2.0 / 10000)

    def test_state_dependent_model_uses_euler(self, smooth):
        """Test models without exact transitions fall back to sub-stepped Euler."""
        grid = GridSpec(0.01, 10, 3)
        values = simulate_coarse_diffusion_batch(smooth, 0.0, grid, 2, [0, 1], substeps=8)
        fine = simulate_euler_batch(smooth, 0.0, 0.1 / 8, 24, 2, [0, 1])
        np.testing.assert_array_equal(values, fine[:, ::8])


class TestBridges:
    """Tests for Brownian bridge sampling."""

    def test_pinned_ends(self):
        """Test bridges start and end at zero."""
        bridges = simulate_bridges(RandomStream(1), 10, 50)
        assert bridges.shape == (50, 11)
        assert np.all(bridges[:, 0] == 0.0)
        assert np.all(bridges[:, -1] == 0.0)

    def test_midpoint_variance(self):
        """Test Var(B_1/2) = 1/4 within a 4-sigma band over 10^4 draws."""
        midpoints = simulate_bridges(RandomStream(12345), 2, 10000)[:, 1]
        assert abs(midpoints.var(ddof=1) - 0.25) < 4.0 * 0.25 * np.sqrt(2.0 / 10000)

    def test_quarter_point_covariance(self):
        """Test Cov(B_1/4, B_3/4) = 1/4 * (1 - 3/4) = 0.0625 within a 4-sigma band."""
        n_draws = 20000
        bridges = simulate_bridges(RandomStream(77), 4, n_draws)
        covariance = np.cov(bridges[:, 1], bridges[:, 3])[0, 1]
        band = 4.0 * np.sqrt((0.1875**2 + 0.0625**2) / n_draws)
        assert abs(covariance - 0.0625) < band

    def test_non_dyadic_mesh_variance(self):
        """Test Var(B_d) = d (1 - d) on a mesh that is not a power of two."""
        bridges = simulate_bridges(RandomStream(8), 6, 10000)
        d = np.arange(7) / 6.0
        expected = d * (1.0 - d)
        np.testing.assert_allclose(bridges.var(axis=0, ddof=1), expected, atol=4.0 * 0.25 * np.sqrt(2.0 / 10000))

    def test_single_bridge(self):
        """Test the single-bridge helper."""
        assert simulate_bridge(RandomStream(2), mesh=8).shape == (9,)

    def test_mesh_too_small(self):
        """Test a mesh below 2 is refused."""
        with pytest.raises(ConfigError):
            simulate_bridges(RandomStream(1), 1, 3)


class TestPathSample:
    """Tests for PathSample and CSV export."""

    def test_rejects_bad_times(self):
        """Test paths must start at 0 with increasing times."""
        with pytest.raises(ModelError):
            PathSample(np.array([0.1, 0.2]), np.array([0.0, 1.0]), PathOrigin.EULER)
        with pytest.raises(ModelError):
            PathSample(np.array([0.0, 0.0]), np.array([0.0, 1.0]), PathOrigin.EULER)
        with pytest.raises(ModelError):
            PathSample(np.array([0.0, 0.1]), np.array([0.0]), PathOrigin.EULER)

    def test_write_paths_csv(self):
        """Test the long-format export."""
        path = PathSample(np.array([0.0, 0.5]), np.array([1.0, 1.25]), PathOrigin.EXACT_DIFFUSION, 3)
        buffer = io.StringIO()
        rows = write_paths_csv([path], buffer)
        lines = buffer.getvalue().splitlines()
        assert rows == 2
        assert lines[0] == ",".join(PATH_COLUMNS)
        assert lines[2] == "3,0.5,1.25,exact-diffusion"
