"""Tests for decay fitting, scaling laws and shot noise."""

import math

import numpy as np
import pytest

from catqubit_tools.core.metrology import (
    DecayFit,
    ExponentialFitter,
    ShotModel,
    binomial_sigma,
    cycle_error_probabilities,
    exp_decay_jacobian,
    exp_decay_model,
    fit_bitflip_scaling,
    fit_damped_cosine,
    fit_exp,
    fit_phaseflip_linear,
    flip_times,
    noise_bias,
    pauli_probabilities,
    sample_shots,
)
from catqubit_tools.utils.validation import FitError, ValidationError


@pytest.fixture
def decay_data():
    t = np.linspace(0.0, 20.0, 41)
    return t, exp_decay_model(t, 0.9, 7.5, 0.05)


class TestExponentialFit:
    def test_noiseless_recovery(self):
        t = np.linspace(0.0, 10.0, 21)
        fit = fit_exp(t, 1.3 * np.exp(-t / 4.0))
        assert fit.amplitude == pytest.approx(1.3, rel=1e-8)
        assert fit.time_constant == pytest.approx(4.0, rel=1e-8)
        assert fit.offset is None

    def test_with_offset(self, decay_data):
        t, y = decay_data
        fit = fit_exp(t, y, with_offset=True)
        assert fit.time_constant == pytest.approx(7.5, rel=1e-6)
        assert fit.offset == pytest.approx(0.05, abs=1e-8)

    def test_rising_curve(self):
        t = np.linspace(0.0, 10.0, 21)
        y = 1.0 - np.exp(-t / 3.0)
        fit = fit_exp(t, y, with_offset=True)
        assert fit.amplitude == pytest.approx(-1.0, rel=1e-6)
        assert fit.time_constant == pytest.approx(3.0, rel=1e-6)

    def test_scale_equivariance(self, decay_data):
        t, y = decay_data
        base = fit_exp(t, y, with_offset=True)
        scaled = fit_exp(3.0 * t, y, with_offset=True)
        assert scaled.time_constant == pytest.approx(3.0 * base.time_constant, rel=1e-6)

    def test_weighted_fit(self, rng):
        t = np.linspace(0.0, 10.0, 30)
        sigma = np.full(t.size, 0.01)
        y = np.exp(-t / 5.0) + rng.normal(0.0, 0.01, t.size)
        fit = fit_exp(t, y, sigma=sigma)
        assert fit.weighted
        assert abs(fit.time_constant - 5.0) < 5 * fit.stderr[1]

    def test_report(self, decay_data):
        t, y = decay_data
        report = fit_exp(t, y, with_offset=True).to_report()
        assert report['model'] == 'exp_offset'
        assert [p['name'] for p in report['parameters']] == ['amplitude', 'time_constant',
                                                            'offset']

    def test_evaluate(self, decay_data):
        t, y = decay_data
        np.testing.assert_allclose(fit_exp(t, y, with_offset=True).evaluate(t), y, atol=1e-8)

    def test_too_few_points(self):
        with pytest.raises(ValidationError):
            fit_exp([0.0, 1.0, 2.0], [1.0, 0.5, 0.25])

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            fit_exp([0.0, 1.0, 2.0, 3.0], [1.0, 0.5, 0.25, 0.1, 0.05])

    def test_non_finite(self):
        with pytest.raises(ValidationError):
            fit_exp([0.0, 1.0, 2.0, 3.0], [1.0, np.nan, 0.25, 0.1])

    def test_iteration_cap(self, decay_data):
        t, y = decay_data
        with pytest.raises(FitError) as info:
            ExponentialFitter(max_iterations=1).fit(t, y + 0.3)
        assert 'x0' in info.value.diagnostic


class TestJacobian:
    @pytest.mark.parametrize('with_offset', [False, True])
    def test_matches_finite_differences(self, with_offset):
        t = np.linspace(0.0, 6.0, 13)
        params = np.array([0.8, 2.5, 0.1])
        count = 3 if with_offset else 2
        analytic = exp_decay_jacobian(t, params[0], params[1], with_offset)
        step = 1e-6
        for column in range(count):
            shifted_up, shifted_down = params.copy(), params.copy()
            shifted_up[column] += step
            shifted_down[column] -= step
            offset_up = shifted_up[2] if with_offset else 0.0
            offset_down = shifted_down[2] if with_offset else 0.0
            numeric = (exp_decay_model(t, shifted_up[0], shifted_up[1], offset_up)
                       - exp_decay_model(t, shifted_down[0], shifted_down[1], offset_down))
            numeric /= 2 * step
            np.testing.assert_allclose(numeric, analytic[:, column], atol=1e-7)


class TestDampedCosine:
    def test_recovers_ramsey_fringe(self):
        t = np.linspace(0.0, 10.0, 201)
        y = 0.5 + 0.4 * np.exp(-0.1 * t) * np.cos(2 * np.pi * 0.35 * t + 0.3)
        fit = fit_damped_cosine(t, y, (0.1, 1.0))
        assert fit.frequency == pytest.approx(0.35, rel=1e-6)
        assert fit.decay_rate == pytest.approx(0.1, rel=1e-5)
        assert fit.phase == pytest.approx(0.3, abs=1e-6)
        assert fit.decay_time == pytest.approx(10.0, rel=1e-5)

    def test_without_decay(self):
        t = np.linspace(0.0, 5.0, 101)
        y = np.cos(2 * np.pi * 0.8 * t)
        fit = fit_damped_cosine(t, y, (0.2, 2.0), with_decay=False)
        assert fit.decay_rate == 0.0
        assert fit.decay_time == math.inf
        assert fit.frequency == pytest.approx(0.8, rel=1e-6)


class TestScalingLaws:
    def test_exp_over_n_recovery(self):
        alpha_sq = np.array([2.0, 4.0, 6.0, 8.0])
        times = 0.5 * np.exp(2.0 * alpha_sq) / alpha_sq
        fit = fit_bitflip_scaling(alpha_sq, times)
        assert fit.exponent == pytest.approx(2.0)
        assert fit.prefactor == pytest.approx(0.5)
        np.testing.assert_allclose(fit.predict(alpha_sq), times, rtol=1e-10)

    def test_exp_model(self):
        alpha_sq = np.array([1.0, 2.0, 3.0])
        fit = fit_bitflip_scaling(alpha_sq, 3.0 * np.exp(1.5 * alpha_sq), model='exp')
        assert fit.exponent == pytest.approx(1.5)
        assert fit.per_photon_factor == pytest.approx(math.exp(1.5))

    def test_needs_three_points(self):
        with pytest.raises(ValidationError):
            fit_bitflip_scaling([1.0, 2.0], [1.0, 2.0])

    def test_needs_positive_times(self):
        with pytest.raises(ValidationError):
            fit_bitflip_scaling([1.0, 2.0, 3.0], [1.0, -2.0, 3.0])

    def test_degenerate_photon_numbers(self):
        with pytest.raises(FitError):
            fit_bitflip_scaling([2.0, 2.0, 2.0], [1.0, 2.0, 3.0])

    def test_phaseflip_slopes(self):
        alpha_sq = np.array([2.0, 4.0, 6.0, 8.0])
        fit = fit_phaseflip_linear(alpha_sq, alpha_sq / 70.0)
        assert fit.t1_eff_origin == pytest.approx(70.0)
        assert fit.t1_eff_free == pytest.approx(70.0)
        assert fit.intercept_free == pytest.approx(0.0, abs=1e-12)

    def test_phaseflip_needs_two_points(self):
        with pytest.raises(ValidationError):
            fit_phaseflip_linear([2.0], [0.1])


class TestPauliChannel:
    def test_probabilities_sum(self):
        p_x, p_y, p_z = pauli_probabilities(0.01, 0.02, 0.03, 5.0)
        assert 0 < p_x + p_y + p_z < 0.75

    def test_pure_bit_flip(self):
        p_x, p_y, p_z = pauli_probabilities(0.1, 0.0, 0.0, 2.0)
        assert p_x == pytest.approx(0.5 * (1 - math.exp(-0.4)))
        assert p_y == pytest.approx(0.0, abs=1e-15)
        assert p_z == pytest.approx(0.0, abs=1e-15)

    def test_cycle_errors_with_infinite_bit_flip(self):
        p_x, _, p_z = cycle_error_probabilities(math.inf, 100.0, 1.0)
        assert p_x == pytest.approx(0.0, abs=1e-15)
        assert p_z == pytest.approx(0.5 * (1 - math.exp(-0.02)))

    def test_noise_bias(self):
        assert noise_bias(1000.0, 10.0) == pytest.approx(100.0)

    def test_flip_times_double_decay_times(self):
        fit_z = DecayFit(1.0, 50.0, None, np.zeros((2, 2)), 0.0)
        fit_x = DecayFit(1.0, 4.0, None, np.zeros((2, 2)), 0.0)
        assert flip_times(fit_z, fit_x) == (100.0, 8.0)


class TestShots:
    def test_seeded_reproducibility(self):
        model = ShotModel(n_shots=500, seed=7)
        p = np.linspace(0.1, 0.9, 9)
        np.testing.assert_array_equal(sample_shots(p, model), sample_shots(p, model))
        assert not np.array_equal(model.sample(p, stream=0), model.sample(p, stream=1))

    def test_estimates_are_fractions(self):
        values = ShotModel(n_shots=10, seed=1).sample([0.0, 0.5, 1.0])
        assert values[0] == 0.0
        assert values[2] == 1.0
        np.testing.assert_allclose(values * 10, np.round(values * 10))

    def test_invalid_shot_model(self):
        with pytest.raises(ValidationError):
            ShotModel(n_shots=0)
        with pytest.raises(ValidationError):
            ShotModel(n_shots=10, seed=-1)

    def test_probability_out_of_range(self):
        with pytest.raises(ValidationError):
            sample_shots([1.1], ShotModel(n_shots=10))

    def test_small_excess_warns(self):
        with pytest.warns(RuntimeWarning):
            values = sample_shots([1.0 + 1e-6], ShotModel(n_shots=10))
        assert values[0] == 1.0

    def test_binomial_sigma_floor(self):
        sigma = binomial_sigma([0.0, 0.5], 100)
        assert sigma[0] == pytest.approx(math.sqrt(0.01 / 100))
        assert sigma[1] == pytest.approx(0.05)
