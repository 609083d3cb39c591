"""Unit tests for the limits package."""

import json
from dataclasses import replace
from unittest.mock import patch

import numpy as np
import pytest

from src.edgeworth.corrections import ExpansionContext
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
from src.models.grid import GridSpec
from src.paths.simulate import PathSample
from src.paths.streams import PathOrigin
from src.utils.errors import ConfigError, ModelError


def _without_timing(report: ExperimentReport) -> dict:
    return report.to_dict(include_timing=False)


class TestMonteCarloConfig:
    """Tests for chunked Monte-Carlo settings."""

    def test_chunks(self, small_mc):
        """Test chunks cover every path id in order."""
        chunks = small_mc.chunks()
        assert len(chunks) == 4
        assert [i for chunk in chunks for i in chunk] == list(range(400))

    def test_ragged_last_chunk(self):
        """Test the final chunk holds the remainder."""
        chunks = MonteCarloConfig(n_paths=10, chunk_size=4).chunks()
        assert [len(chunk) for chunk in chunks] == [4, 4, 2]

    def test_to_dict_omits_workers(self, small_mc):
        """Test the worker count is not part of a run's identity."""
        assert small_mc.to_dict() == {"n_paths": 400, "seed": 12345, "chunk_size": 100}

    @pytest.mark.parametrize(
        "kwargs", [{"n_paths": 1}, {"chunk_size": 0}, {"workers": 0}, {"seed": -3}]
    )
    def test_invalid(self, kwargs):
        """Test invalid settings raise ConfigError."""
        with pytest.raises(ConfigError):
            MonteCarloConfig(**kwargs)

    def test_map_independent_of_workers(self, small_mc):
        """Test chunk results come back in chunk order for any worker count."""
        serial = map_path_chunks(list, small_mc)
        threaded = map_path_chunks(list, replace(small_mc, workers=3))
        assert serial == threaded


class TestIncrements:
    """Tests for correction sequences and likelihood products."""

    def test_likelihood_product(self):
        """Test signed products through the log-sum."""
        product, nonpositive, nonfinite = likelihood_product(np.array([[2.0, 0.5], [-1.0, 2.0]]))
        np.testing.assert_allclose(product, [1.0, -2.0])
        np.testing.assert_array_equal(nonpositive, [False, True])
        np.testing.assert_array_equal(nonfinite, [False, False])

    def test_likelihood_product_overflow(self):
        """Test overflowing products are flagged rather than raised."""
        product, _, nonfinite = likelihood_product(np.array([[1e300, 1e300], [1.0, 1.0]]))
        np.testing.assert_array_equal(nonfinite, [True, False])
        assert product[1] == 1.0

    def test_sequence_summaries(self):
        """Test sums, sups and quadratic variation per path."""
        seq = IncrementSequence(first=np.array([[0.1, -0.3], [0.2, 0.2]]))
        np.testing.assert_allclose(seq.sums(), [-0.2, 0.4])
        np.testing.assert_allclose(seq.sups(), [0.3, 0.2])
        np.testing.assert_allclose(seq.quadratic_variation(), [0.1, 0.08])
        assert (seq.n_paths, seq.n) == (2, 2)
        with pytest.raises(ModelError):
            seq.factors(second_order=True)

    def test_batch_increments(self, unit_context):
        """Test corrections come out one row per path, one column per step."""
        values = np.cumsum(np.full((3, 11), 0.1), axis=1) - 0.1
        seq = correction_increments(unit_context, values, second_order=True)
        assert seq.first.shape == seq.second.shape == (3, 10)
        # Every step equals kh, so w = 0 and He_3(0) = 0
        np.testing.assert_allclose(seq.first, 0.0, atol=1e-15)

    def test_path_increments(self, unit_context):
        """Test single-path corrections and their input checks."""
        times = np.linspace(0.0, 1.0, 11)
        path = PathSample(times, np.zeros(11), PathOrigin.EXACT_DIFFUSION)
        assert path_correction_increments(unit_context, path).first.shape == (1, 10)
        with pytest.raises(ModelError):
            path_correction_increments(unit_context, PathSample(times, np.zeros(11), PathOrigin.CHAIN))
        with pytest.raises(ModelError):
            path_correction_increments(unit_context, PathSample(times[:5], np.zeros(5), PathOrigin.EULER))


class TestReports:
    """Tests for estimates and canonical JSON."""

    def test_from_sample(self):
        """Test mean and standard error."""
        est = Estimate.from_sample(np.array([1.0, 2.0, 3.0]))
        assert est.value == 2.0
        assert est.stderr == pytest.approx(1.0 / np.sqrt(3.0))
        assert est.n == 3

    def test_plain(self):
        """Test numpy values and non-finite floats become JSON types."""
        data = plain({"a": np.float64(np.nan), "b": np.arange(2), "c": np.bool_(True), 1: np.int64(4)})
        assert data == {"a": "nan", "b": [0, 1], "c": True, "1": 4}

    def test_report_json_is_canonical(self):
        """Test sorted keys and a trailing newline."""
        text = report_json({"b": 1.0, "a": [np.inf]})
        assert text.endswith("\n")
        assert text.index('"a"') < text.index('"b"')
        assert json.loads(text) == {"a": ["inf"], "b": 1.0}

    def test_missing_estimate(self):
        """Test looking up an absent estimate raises KeyError."""
        report = ExperimentReport("demo", {})
        report.add("x", Estimate.exact(1.5))
        assert report.value("x") == 1.5
        with pytest.raises(KeyError):
            report.value("y")

    def test_timing_only_on_request(self):
        """Test wall-clock time is left out of the report by default."""
        report = ExperimentReport("demo", {}, wall_clock=1.25)
        assert "wall_clock_seconds" not in report.to_dict()
        assert report.to_dict(include_timing=True)["wall_clock_seconds"] == 1.25

    def test_quantile_estimate(self):
        """Test the median of a uniform grid and its order-statistic error."""
        est = quantile_estimate(np.arange(1001) / 1000.0, 0.5)
        assert est.value == pytest.approx(0.5)
        assert est.stderr == pytest.approx(np.sqrt(0.25 / 1001), abs=1e-3)


class TestConstants:
    """Tests for the Gaussian moment constants."""

    def test_gaussian_moment_constant(self):
        """Test E[Z^6 + 2 Z^4 + Z^2] = 22."""
        assert gaussian_moment_constant() == pytest.approx(22.0, abs=1e-8)

    def test_hermite_moment_constant(self):
        """Test E[He_3(Z)^2] = 6."""
        assert hermite_moment_constant() == pytest.approx(6.0, abs=1e-8)

    def test_schedule_ladder(self):
        """Test k = ceil(n^a)."""
        assert schedule_ladder(16) == {0.6: 6, 1.0: 16}
        assert schedule_ladder(100, [0.5]) == {0.5: 10}


class TestDistanceExperiments:
    """Tests for the Monte-Carlo distance and scaling experiments."""

    def test_distance_independent_of_workers(self, unit_context, small_mc):
        """Test the report is identical for one and several workers."""
        serial = estimate_first_order_distance(unit_context, small_mc)
        threaded = estimate_first_order_distance(unit_context, replace(small_mc, workers=4))
        assert _without_timing(serial) == _without_timing(threaded)
        assert serial.value("distance") > 0.0
        assert serial.details["nonfinite_paths"] == 0

    def test_second_order_distance(self, unit_context, small_mc):
        """Test the second-order distance runs on the same paths."""
        report = estimate_second_order_distance(unit_context, small_mc)
        assert report.experiment == "second-order-distance"
        assert np.isfinite(report.value("distance"))

    def test_symmetric_innovation_has_zero_distance(self, unit, symmetric, standard_grid, small_mc):
        """Test every first-order factor is one when the third moment vanishes."""
        ctx = ExpansionContext(unit, symmetric, standard_grid)
        assert estimate_first_order_distance(ctx, small_mc).value("distance") == 0.0

    def test_sup_scaling(self, unit_context, small_mc):
        """Test the sup and sum quantiles and their scaling targets."""
        report = sup_scaling_diagnostics(unit_context, small_mc)
        assert report.targets["sum_scale"] == pytest.approx(0.1 ** 0.5)
        assert {"sup_abs_delta_q50", "sup_abs_delta_q99", "abs_sum_delta_q90", "mean_cross_product"} <= set(
            report.estimates
        )
        cross = report.estimates["mean_cross_product"]
        assert abs(cross.value) < 4.0 * cross.stderr + 1e-12

    def test_martingale(self, unit_context, small_mc):
        """Test the lag-one slope is zero within four standard errors."""
        report = martingale_diagnostics(unit_context, small_mc)
        slope = report.estimates["slope"]
        assert abs(slope.value) < 4.0 * slope.stderr
        assert report.details["pairs"] == 28

    def test_martingale_needs_two_steps(self, unit, skewed, small_mc):
        """Test a single-step grid is refused."""
        ctx = ExpansionContext(unit, skewed, GridSpec(0.001, 100, 1))
        with pytest.raises(ModelError):
            martingale_diagnostics(ctx, small_mc)

    def test_moment_scaling(self, unit_context, small_mc):
        """Test k E|Delta|^2 is the same across k on paired paths."""
        report = moment_scaling_diagnostics(unit_context, [16, 64], small_mc)
        assert report.details["spread"]["p2"] == pytest.approx(1.0, abs=1e-9)
        assert "scaled_moment_p4_k64" in report.estimates

    def test_second_order_scaling(self, unit_context, small_mc):
        """Test the second-order diagnostics report their moments."""
        report = second_order_scaling_diagnostics(unit_context, small_mc)
        assert report.targets["sum_scale"] == pytest.approx(np.sqrt(10.0) / 100.0)
        assert report.value("scaled_moment_p2") > 0.0

    def test_regime_ladder(self, unit_context, small_mc):
        """Test one distance and one regime tag per k."""
        report = regime_ladder(unit_context, [25, 100], small_mc)
        assert set(report.details["regimes"]) == {"25", "100"}
        assert report.value("distance_k25") > report.value("distance_k100")
        assert report.design["kh"] == pytest.approx(0.1)

    def test_regime_ladder_with_nonfinite_products(self, unit_context, small_mc):
        """Test a ladder whose products all overflow reports NaN distances instead of failing."""

        def overflowing(factors):
            paths = np.atleast_2d(factors).shape[0]
            return np.full(paths, np.inf), np.zeros(paths, dtype=bool), np.ones(paths, dtype=bool)

        with patch("src.limits.experiments.likelihood_product", side_effect=overflowing):
            report = regime_ladder(unit_context, [25, 100], small_mc)
        assert np.isnan(report.value("distance_k25"))
        assert report.estimates["distance_k100"].n == 0
        assert report.details["nonfinite_paths_k25"] == small_mc.n_paths
        assert not report.details["monotone_decreasing"]

    def test_energy_proxy(self, unit, skewed, small_mc):
        """Test the chain-versus-diffusion proxy is labelled as such."""
        ctx = ExpansionContext(unit, skewed, GridSpec.from_coarse_step(0.1, 4, 3))
        report = estimate_energy_proxy(ctx, small_mc)
        assert "proxy" in report.details["label"]
        assert report.value("energy_distance") > -0.05


class TestCltExperiment:
    """Tests for the CLT experiment."""

    def test_targets(self, unit, skewed, small_mc):
        """Test the variance target c mu3^2 / 6 and the literal constant."""
        ctx = ExpansionContext(unit, skewed, GridSpec.from_coarse_step(0.1, 16, 32))
        report = clt_experiment(ctx, small_mc)
        assert report.targets["c"] == 2.0
        assert report.targets["target_var_sum_delta"] == pytest.approx(2.0 / 6.0, rel=1e-8)
        assert report.targets["literal_target_var_sum_delta"] == pytest.approx(44.0, rel=1e-8)
        assert 0.0 <= report.value("ks_pvalue") <= 1.0

    def test_needs_constant_coefficients(self, smooth, skewed, standard_grid, small_mc):
        """Test state-dependent models are refused."""
        ctx = ExpansionContext(smooth, skewed, standard_grid)
        with pytest.raises(ModelError):
            clt_experiment(ctx, small_mc)

    def test_regime_from_declared_ratio(self, unit, skewed, small_mc):
        """Test the regime tag compares the realised n/k with the declared target."""
        ctx = ExpansionContext(unit, skewed, GridSpec.from_coarse_step(0.1, 16, 32))
        assert clt_experiment(ctx, small_mc, c_target=2.0).regime == "critical-ratio"
        assert clt_experiment(ctx, small_mc, c_target=0.5).regime == "neither"
        assert clt_experiment(ctx, small_mc).regime == "neither"


class TestLatticeAndEuler:
    """Tests for the remainder ladder and the Euler benchmark."""

    def test_remainder_ladder(self, unit_context, small_lattice):
        """Test the correction lowers the lattice remainder at every k."""
        report = remainder_ladder_check(unit_context, k_values=[8, 16], kh=0.1, lattice=small_lattice)
        assert report.details["correction_reduces_error"]
        assert report.value("scaled_remainder_k16") == pytest.approx(16 * report.value("remainder_k16"))
        assert report.details["leaked_mass_k8"] <= 1e-6

    def test_euler_benchmark(self, ou, small_mc):
        """Test one energy distance and one KS statistic per k."""
        report = euler_consistency_experiment(ou, 0.25, 2, [1, 4], small_mc)
        assert {"energy_k1", "energy_k4", "max_ks_k1", "max_ks_k4"} <= set(report.estimates)
        assert isinstance(report.details["strictly_decreasing"], bool)

    def test_euler_benchmark_needs_exact_transitions(self, smooth, small_mc):
        """Test models without exact transitions are refused."""
        with pytest.raises(ModelError):
            euler_consistency_experiment(smooth, 0.25, 2, [1, 4], small_mc)

    def test_energy_distance(self):
        """Test the energy distance of a sample with itself and a shifted copy."""
        rng = np.random.default_rng(0)
        a = rng.standard_normal((200, 2))
        assert energy_distance(a, a) == pytest.approx(0.0, abs=1e-12)
        assert energy_distance(a, a + 1.0) > 0.1
