"""Unit tests for the edgeworth package."""

import logging
from dataclasses import replace

import numpy as np
import pytest
from scipy import integrate

from src.density.derivatives import DiffusionDensity
from src.edgeworth.corrections import (
    ExpansionContext,
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
from src.models.grid import GridSpec
from src.utils.errors import DensityUnderflowError, ModelError, QuadratureError


class TestConvolution:
    """Tests for the time-space convolution."""

    def test_density_with_itself(self, unit):
        """Test (p conv p)(t, x, y) = t p(t, x, y) on the unit model."""
        p = DensityKernel(DiffusionDensity(unit))
        assert float(convolve_time_space(p, p, 1.0, 0.0, 1.0)) == pytest.approx(0.3989423, abs=1e-6)

    def test_broadcast_shape(self, unit):
        """Test the result takes the broadcast shape of (t, x, y)."""
        p = DensityKernel(DiffusionDensity(unit))
        value = convolve_time_space(p, p, 0.5, 0.0, np.linspace(-1.0, 1.0, 5))
        assert value.shape == (5,)

    def test_non_positive_time(self, unit):
        """Test t <= 0 is refused."""
        p = DensityKernel(DiffusionDensity(unit))
        with pytest.raises(ModelError):
            convolve_time_space(p, p, 0.0, 0.0, 0.0)

    def test_zero_kernel_short_circuits(self, unit):
        """Test a zero factor gives zeros without evaluating anything."""
        p = DensityKernel(DiffusionDensity(unit))
        np.testing.assert_array_equal(convolve_time_space(p, ZeroKernel(), 0.0, 0.0, [0.0, 1.0]), [0.0, 0.0])

    def test_unreachable_tolerance(self, unit, skewed):
        """Test a coarse rule with an impossible tolerance raises with its error estimate."""
        p = DensityKernel(DiffusionDensity(unit))
        quad = QuadratureConfig(time_nodes=2, space_nodes=4, rtol=1e-12, atol=0.0)
        with pytest.raises(QuadratureError) as excinfo:
            convolve_time_space(p, skewness_operator(p, skewed), 0.1, 0.0, 0.3, quad)
        assert excinfo.value.achieved_error > excinfo.value.tolerance

    def test_convolution_kernel_derivative(self, unit, skewed):
        """Test x-derivatives of a convolution kernel move onto its left factor."""
        p = DensityKernel(DiffusionDensity(unit))
        kernel = ConvolutionKernel(p, p, QuadratureConfig()).derivative_x(2)
        assert isinstance(kernel.f, DensityKernel)
        assert kernel.f.order_x == 2

    def test_quadrature_config_levels(self):
        """Test refinement helpers scale the node counts."""
        quad = QuadratureConfig(time_nodes=10, space_nodes=20, nested_time_nodes=4, nested_space_nodes=8)
        refined = quad.refined()
        assert (refined.time_nodes, refined.space_nodes) == (20, 40)
        level = quad.nested_level(2)
        assert (level.time_nodes, level.space_nodes, level.check) == (16, 32, False)
        half = quad.nested_level(-1)
        assert (half.time_nodes, half.space_nodes) == (2, 4)

    def test_derivative_is_abstract(self):
        """Test a kernel without x-derivatives cannot be instantiated."""

        class ValueOnly(Kernel):
            def __call__(self, t, x, y):
                return np.zeros(np.broadcast(t, x, y).shape)

        with pytest.raises(TypeError):
            ValueOnly()

    def test_scaled_kernel_is_not_differentiated(self, unit, skewed):
        """Test asking a scaled kernel for x-derivatives is a model error."""
        p = DensityKernel(DiffusionDensity(unit))
        with pytest.raises(ModelError):
            skewness_operator(p, skewed).derivative_x(1)


class TestOperators:
    """Tests for the skewness, kurtosis and frozen-generator operators."""

    def test_skewness_operator_value(self, unit, skewed):
        """Test F1[p](1, 0, 2) = He_3(1) phi(1) / 6 for mu3 = 1."""
        p = DensityKernel(DiffusionDensity(unit))
        value = float(skewness_operator(p, skewed)(1.0, 0.0, 2.0))
        assert value == pytest.approx(-0.0806569, abs=1e-7)

    def test_operators_vanish(self, unit, gaussian, symmetric):
        """Test F1 is zero for symmetric laws and F2 for Gaussian kurtosis."""
        p = DensityKernel(DiffusionDensity(unit))
        assert skewness_operator(p, gaussian).is_zero
        assert skewness_operator(p, symmetric).is_zero
        assert kurtosis_operator(p, gaussian).is_zero
        assert not kurtosis_operator(p, symmetric).is_zero

    def test_kurtosis_operator_value(self, unit, symmetric):
        """Test F2[p] = (mu4 - 3)/24 * He_4(w) p for the unit model."""
        p = DensityKernel(DiffusionDensity(unit))
        value = float(kurtosis_operator(p, symmetric)(1.0, 0.0, 1.0))
        # w = 0: He_4(0) = 3, excess = -0.5
        assert value == pytest.approx(-0.5 / 24.0 * 3.0 * 0.3989423, rel=1e-6)

    def test_frozen_term_vanishes_for_constant_coefficients(self, unit):
        """Test the generator difference is zero when nothing depends on x."""
        density = DiffusionDensity(unit)
        assert GeneratorDifferenceKernel(density, unit, 0.0).is_zero
        np.testing.assert_array_equal(frozen_generator_term(density, 0.1, 0.0, np.zeros(3)), np.zeros(3))

    def test_frozen_term_on_smooth_model(self, smooth, small_bridge, coarse_quad):
        """Test the frozen-generator term is finite and nonzero for a state-dependent model."""
        density = DiffusionDensity(smooth, small_bridge)
        y = np.linspace(-0.5, 0.5, 3)
        value = frozen_generator_term(density, 0.1, 0.0, y, coarse_quad)
        assert value.shape == (3,)
        assert np.all(np.isfinite(value))
        assert np.any(value != 0.0)

    def test_frozen_term_stable_under_refinement(self, ou):
        """Test the frozen-generator term moves by under 10% when every node count doubles."""
        density = DiffusionDensity(ou)
        t, x = 0.1, 0.5
        mean, sd = x * np.exp(-t), np.sqrt(-np.expm1(-2.0 * t) / 2.0)
        y = mean + np.array([-2.0, -0.5, 0.0, 1.0, 2.0]) * sd
        quad = QuadratureConfig(time_nodes=32, space_nodes=64, check=False)
        coarse = frozen_generator_term(density, t, x, y, quad)
        fine = frozen_generator_term(density, t, x, y, quad.refined())
        scale = np.max(np.abs(fine))
        assert scale > 0.0
        assert np.max(np.abs(coarse - fine)) < 0.1 * scale

    def test_generator_difference_at_freezing_point(self, smooth, small_bridge):
        """Test only the lower-order terms survive at the freezing point itself."""
        density = DiffusionDensity(smooth, small_bridge)
        kernel = GeneratorDifferenceKernel(density, smooth, 0.4)
        a = 0.5 * float(smooth.sigma(0.4)) ** 2
        assert kernel.a0 == pytest.approx(a)
        assert np.isfinite(float(kernel(0.2, 0.4, 0.5)))


class TestFirstCorrection:
    """Tests for pi1 and the first ratio."""

    @pytest.mark.parametrize("t", [0.04, 0.1, 0.25])
    def test_quadrature_matches_closed_form(self, unit, skewed, standard_grid, t):
        """Test the convolution form of pi1 against the Hermite closed form."""
        ctx = ExpansionContext(unit, skewed, standard_grid)
        y = t + np.linspace(-4.0, 4.0, 9) * np.sqrt(t)
        closed = first_correction_closed(ctx, t, 0.0, y)
        numeric = first_correction(ctx, t, 0.0, y)
        np.testing.assert_allclose(numeric, closed, rtol=1e-3, atol=1e-3 * np.max(np.abs(closed)))

    def test_hermite_form_matches_closed_form(self, unit_context):
        """Test the unit-model Hermite helper agrees with the general closed form."""
        y = np.linspace(-1.0, 1.5, 11)
        np.testing.assert_allclose(
            first_correction_hermite(1.0, 0.1, 0.0, y),
            first_correction_closed(unit_context, 0.1, 0.0, y),
            rtol=1e-12,
            atol=1e-14,
        )

    def test_integrates_to_zero(self, unit_context):
        """Test pi1 carries no mass."""
        y = np.linspace(-3.0, 3.2, 4001)
        values = first_correction_closed(unit_context, 0.1, 0.0, y)
        assert abs(integrate.trapezoid(values, y)) < 1e-8

    def test_numeric_correction_carries_no_mass(self, ou, mild_skew, standard_grid):
        """Test the quadrature pi1 of a state-dependent model integrates to zero over y."""
        ctx = ExpansionContext(ou, mild_skew, standard_grid, quad=QuadratureConfig(check=False))
        t, x = 0.1, 0.3
        mean, sd = x * np.exp(-t), np.sqrt(-np.expm1(-2.0 * t) / 2.0)
        total, _ = integrate.quad(
            lambda y: float(first_correction(ctx, t, x, y)), mean - 8.0 * sd, mean + 8.0 * sd, limit=200
        )
        assert abs(total) < 1e-5

    def test_symmetric_innovation(self, unit, symmetric, standard_grid):
        """Test pi1 vanishes for a symmetric innovation."""
        ctx = ExpansionContext(unit, symmetric, standard_grid)
        np.testing.assert_array_equal(first_correction(ctx, 0.1, 0.0, [0.0, 0.1]), [0.0, 0.0])
        np.testing.assert_array_equal(first_ratio(ctx, 0.0, [0.0, 0.1]), [0.0, 0.0])

    def test_closed_forms_need_constant_coefficients(self, smooth, skewed, standard_grid):
        """Test closed forms are refused for state-dependent models."""
        ctx = ExpansionContext(smooth, skewed, standard_grid)
        with pytest.raises(ModelError):
            first_correction_closed(ctx, 0.1, 0.0, 0.0)
        with pytest.raises(ModelError):
            second_correction_closed(ctx, 0.1, 0.0, 0.0)

    def test_smooth_model_resolution(self, smooth, mild_skew, standard_grid, small_bridge, coarse_quad):
        """Test pi1 for a smooth model is stable under doubling the node counts."""
        ctx = ExpansionContext(smooth, mild_skew, standard_grid, quad=coarse_quad, bridge=small_bridge)
        fine = replace(ctx, quad=coarse_quad.refined())
        y = np.array([-0.3, 0.0, 0.3])
        coarse_value = first_correction(ctx, 0.1, 0.0, y)
        fine_value = first_correction(fine, 0.1, 0.0, y)
        scale = np.max(np.abs(fine_value))
        assert scale > 0.0
        assert np.max(np.abs(coarse_value - fine_value)) < 0.1 * scale


class TestRatios:
    """Tests for the per-step ratios."""

    def test_first_ratio_value(self, unit_context):
        """Test delta1 at y = x with mu3 = 1, k = 100, h = 0.001."""
        assert float(first_ratio(unit_context, 0.0, 0.0)) == pytest.approx(0.0152843, abs=1e-7)

    def test_first_ratio_scaling_in_k(self, unit_context):
        """Test delta1 halves when k quadruples at fixed kh."""
        finer = unit_context.with_grid(GridSpec.from_coarse_step(0.1, 400, 10))
        y = np.linspace(-0.5, 0.7, 7)
        np.testing.assert_allclose(first_ratio(finer, 0.0, y), 0.5 * first_ratio(unit_context, 0.0, y))

    def test_numeric_ratio_matches_closed(self, unit, skewed, standard_grid):
        """Test the quadrature route of delta1 against the closed form."""
        ctx = ExpansionContext(unit, skewed, standard_grid, prefer_closed_form=False)
        y = np.linspace(-0.5, 0.7, 7)
        w = (y - 0.1) / np.sqrt(0.1)
        closed = first_ratio_closed(1.0, 100, w)
        np.testing.assert_allclose(first_ratio(ctx, 0.0, y), closed, rtol=1e-3, atol=1e-3 * np.max(np.abs(closed)))

    def test_underflow(self, unit_context):
        """Test a far end point raises with the log density attached."""
        with pytest.raises(DensityUnderflowError) as excinfo:
            first_ratio(unit_context, 0.0, 50.0)
        assert excinfo.value.log_density < -700.0

    def test_second_ratio_symmetric(self, unit, symmetric, standard_grid):
        """Test delta2 reduces to the kurtosis term e He_4(w) / (24 k)."""
        ctx = ExpansionContext(unit, symmetric, standard_grid)
        w = -np.sqrt(0.1)
        expected = -0.5 * (w**4 - 6.0 * w**2 + 3.0) / (24.0 * 100)
        assert float(second_ratio(ctx, 0.0, 0.0)) == pytest.approx(expected, rel=1e-10)

    def test_schedule_warning(self, unit, skewed, caplog):
        """Test an out-of-schedule grid is accepted with a warning."""
        with caplog.at_level(logging.WARNING, logger="src.edgeworth.corrections"):
            ctx = ExpansionContext(unit, skewed, GridSpec(0.02, 100, 1))
        assert not ctx.schedule_satisfied
        assert "Step schedule violated" in caplog.text


class TestSecondCorrection:
    """Tests for pi2."""

    @pytest.mark.parametrize("t", [0.04, 0.1, 0.25])
    def test_kurtosis_term_matches_closed_form(self, unit, symmetric, standard_grid, t):
        """Test p conv F2[p] against e/24 He_4(w) p / t."""
        ctx = ExpansionContext(unit, symmetric, standard_grid)
        y = t + np.linspace(-4.0, 4.0, 9) * np.sqrt(t)
        numeric = second_correction(ctx, t, 0.0, y)
        closed = second_correction_closed(ctx, t, 0.0, y)
        np.testing.assert_allclose(
            numeric.kurtosis, closed.kurtosis, rtol=1e-3, atol=1e-3 * np.max(np.abs(closed.kurtosis))
        )
        np.testing.assert_array_equal(numeric.nested, np.zeros(9))
        assert numeric.nested_converged

    def test_closed_nested_term_at_centre(self, unit_context):
        """Test the nested closed form at w = 0 is -15/72 mu3^2 p / t."""
        t = 0.1
        closed = second_correction_closed(unit_context, t, 0.0, t)
        p = 1.0 / np.sqrt(2.0 * np.pi * t)
        assert float(closed.nested) == pytest.approx(-15.0 / 72.0 * p / t, rel=1e-10)
        assert float(closed.frozen) == 0.0

    def test_to_dict(self, unit_context):
        """Test the breakdown serializes its total."""
        payload = second_correction_closed(unit_context, 0.1, 0.0, [0.0, 0.1]).to_dict()
        assert set(payload) >= {"kurtosis", "nested", "frozen", "total", "nested_converged"}
        assert len(payload["total"]) == 2

    @pytest.mark.slow
    @pytest.mark.parametrize("t", [0.04, 0.1, 0.25])
    def test_nested_term_matches_closed_form(self, unit, skewed, standard_grid, t):
        """Test the double convolution at default settings against skew^2/72 He_6(w) p / t."""
        ctx = ExpansionContext(unit, skewed, standard_grid)
        y = t + np.array([-3.0, -1.0, 0.0, 1.5, 3.0]) * np.sqrt(t)
        numeric = second_correction(ctx, t, 0.0, y)
        closed = second_correction_closed(ctx, t, 0.0, y)
        assert numeric.nested_converged
        np.testing.assert_allclose(numeric.nested, closed.nested, rtol=1e-2)

    @pytest.mark.slow
    def test_numeric_correction_carries_no_mass(self, ou, mild_skew, standard_grid):
        """Test every term of the quadrature pi2 of a state-dependent model integrates to zero over y."""
        ctx = ExpansionContext(ou, mild_skew, standard_grid, quad=QuadratureConfig(check=False))
        t, x = 0.1, 0.3
        mean, sd = x * np.exp(-t), np.sqrt(-np.expm1(-2.0 * t) / 2.0)
        total, _ = integrate.quad(
            lambda y: float(second_correction(ctx, t, x, y).total), mean - 8.0 * sd, mean + 8.0 * sd, limit=200
        )
        assert abs(total) < 2e-3


class TestNestedTerm:
    """Tests for the lattice evaluation of p conv F1[p conv F1[p]]."""

    @pytest.fixture
    def lattice_quad(self):
        return QuadratureConfig(
            nested_time_nodes=16, nested_space_nodes=32, nested_lattice_points=48, nested_max_refinements=0
        )

    def test_symmetric_innovation(self, unit, symmetric):
        """Test the nested term is zero without evaluating anything for a symmetric law."""
        estimate = nested_skewness_term(DiffusionDensity(unit), symmetric, 0.1, 0.0, [0.0, 0.1])
        np.testing.assert_array_equal(estimate.value, [0.0, 0.0])
        assert estimate.converged
        assert estimate.level == 0

    def test_non_positive_time(self, unit, skewed):
        """Test t <= 0 is a model error."""
        with pytest.raises(ModelError):
            nested_skewness_term(DiffusionDensity(unit), skewed, [0.1, 0.0], 0.0, 0.0)

    def test_coarse_rule_at_centre(self, unit, skewed, lattice_quad):
        """Test a coarse lattice already lands near -15/72 mu3^2 p / t at w = 0."""
        t = 0.1
        estimate = nested_skewness_term(DiffusionDensity(unit), skewed, t, 0.0, t, lattice_quad)
        expected = -15.0 / 72.0 / np.sqrt(2.0 * np.pi * t) / t
        assert estimate.value.shape == ()
        assert estimate.level == 0
        assert float(estimate.value) == pytest.approx(expected, rel=2e-2)

    def test_shared_lattice_across_start_points(self, unit, skewed, lattice_quad):
        """Test start points sharing (t, y) give the values they get on their own."""
        density = DiffusionDensity(unit)
        x = np.array([0.0, 0.2])
        shared = nested_skewness_term(density, skewed, 0.1, x, 0.15, lattice_quad).value
        alone = [float(nested_skewness_term(density, skewed, 0.1, xi, 0.15, lattice_quad).value) for xi in x]
        np.testing.assert_allclose(shared, alone, rtol=1e-3)

    def test_convergence_flag(self):
        """Test the estimate is converged only below its tolerance."""
        assert NestedEstimate(np.zeros(1), 1e-3, 0, 5e-3).converged
        assert not NestedEstimate(np.zeros(1), 1e-2, 2, 5e-3).converged


class TestRatioBounds:
    """Tests for the ratio bound shapes and their fits."""

    @pytest.mark.parametrize("order", [1, 2])
    def test_fit_is_stable_across_k(self, order):
        """Test one constant serves every k."""
        fit = fit_ratio_bound(order, 1.0, 1.0, [25, 100, 400])
        assert fit.spread <= 2.0
        assert set(fit.constants) == {25, 100, 400}
        r = np.linspace(-6.0, 6.0, 241)
        w = r - np.sqrt(0.1)
        for k in (25, 100, 400):
            if order == 1:
                ratio = first_ratio_closed(1.0, k, w)
            else:
                ratio = second_ratio_closed(1.0, 1.0, k, w)
            envelope = fit.constant * ratio_bound_shape(order, k, r)
            assert np.all(np.abs(ratio) <= envelope * (1.0 + 1e-12))

    def test_fit_standardizes_with_sigma(self):
        """Test the fit uses w = (r - m sqrt(kh)) / sigma for a non-unit diffusion."""
        fit = fit_ratio_bound(1, 1.0, 0.0, [25, 100], drift=0.5, sigma=2.0)
        r = np.linspace(-6.0, 6.0, 241)
        w = (r - 0.5 * np.sqrt(0.1)) / 2.0
        for k in (25, 100):
            expected = np.max(np.abs(first_ratio_closed(1.0, k, w)) / ratio_bound_shape(1, k, r))
            assert fit.constants[k] == pytest.approx(expected, rel=1e-12)

    def test_unsupported_order(self):
        """Test only the first two ratio orders have shapes."""
        with pytest.raises(ModelError):
            ratio_bound_shape(3, 100, 0.0)

    def test_to_dict(self):
        """Test the fit serializes with string keys."""
        payload = fit_ratio_bound(1, 0.5, 0.0, [4, 16]).to_dict()
        assert set(payload["constants"]) == {"4", "16"}
        assert payload["order"] == 1
