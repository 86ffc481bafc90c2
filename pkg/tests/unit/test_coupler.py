"""Tests for the storage-coupler-ancilla spectrum."""

import math
from dataclasses import replace

import numpy as np
import pytest

from catqubit_tools.core.coupler import (
    CouplerSpectrumSolver,
    CouplerSystemParams,
    SpectrumResult,
    _seed_candidates,
    coupler_spectrum,
    find_coupler_resonance,
    transmon_charge_basis,
    tune_coupler_model,
)
from catqubit_tools.utils.validation import LabelingError, ValidationError


@pytest.fixture
def guess():
    return CouplerSystemParams.initial_guess()


@pytest.fixture
def uncoupled(guess):
    return guess.replace(lambda_sc=0.0, lambda_ca=0.0, lambda_sa=0.0)


class TestParams:
    def test_squid_energy(self, guess):
        assert guess.coupler_josephson(0.0) == pytest.approx(34.23 + 11.97)
        assert guess.coupler_josephson(0.5) == pytest.approx(34.23 - 11.97)
        assert guess.coupler_josephson(0.2) == pytest.approx(guess.coupler_josephson(-0.2))

    def test_vector_round_trip(self, guess):
        assert CouplerSystemParams.from_vector(guess.to_vector()) == guess

    @pytest.mark.parametrize('changes', [{'E_Cc': 0.0}, {'omega_s0': -1.0}, {'E_J2c': -0.1}])
    def test_invalid(self, guess, changes):
        with pytest.raises(ValidationError):
            guess.replace(**changes)


class TestTransmon:
    def test_charge_basis(self):
        energies, charge = transmon_charge_basis(0.2, 20.0)
        assert np.all(np.diff(energies) > 0)
        np.testing.assert_allclose(charge, charge.conj().T, atol=1e-12)
        assert energies[1] - energies[0] == pytest.approx(math.sqrt(8 * 20.0 * 0.2) - 0.2,
                                                          rel=0.01)


class TestSpectrum:
    def test_kept_levels(self):
        with pytest.raises(ValidationError):
            CouplerSpectrumSolver((5, 3, 4))
        with pytest.raises(ValidationError):
            CouplerSpectrumSolver((5, 4))

    def test_uncoupled_levels_are_bare(self, uncoupled):
        result = CouplerSpectrumSolver().spectrum(uncoupled, 0.0)
        energies, _ = transmon_charge_basis(uncoupled.E_Ca, uncoupled.E_Ja)
        assert result.omega_s == pytest.approx(uncoupled.omega_s0, abs=1e-9)
        assert result.omega_a == pytest.approx(energies[1] - energies[0], abs=1e-9)
        assert result.chi_sa == pytest.approx(0.0, abs=1e-9)
        assert result.K_s_g == pytest.approx(0.0, abs=1e-9)
        assert not result.flagged

    def test_coupler_tunes_down_with_flux(self, guess):
        at_zero, at_half = coupler_spectrum(guess, [0.0, 0.5])
        assert at_half.omega_c < at_zero.omega_c
        assert at_zero.to_row()['flux'] == 0.0

    def test_missing_label_is_nan(self):
        result = SpectrumResult(0.1, {(0, 0, 0): 0.0}, {})
        assert math.isnan(result.omega_s)
        assert math.isnan(result.chi_sc)


class TestResonance:
    def test_uncoupled_crossing_has_no_mixing(self, uncoupled):
        point = CouplerSpectrumSolver().crossing_branches(uncoupled, 0.3)
        assert point.trackable
        assert point.mixing == pytest.approx(0.0, abs=1e-12)
        assert point.gap == pytest.approx(abs(point.detuning), abs=1e-9)

    def test_coupled_mixing_is_bounded(self, guess):
        point = CouplerSpectrumSolver().crossing_branches(guess, 0.44)
        assert 0.0 <= point.mixing <= 0.5 + 1e-12
        assert 0.0 <= point.span <= 1.0 + 1e-12

    def test_uncoupled_scan_finds_nothing(self, uncoupled):
        report = find_coupler_resonance(uncoupled, np.arange(0.40, 0.4801, 0.005))
        assert not report.found
        assert math.isnan(report.flux)
        assert report.untrackable == []
        assert set(report.scan) == {'flux', 'gap', 'mixing', 'detuning', 'span'}

    def test_coarse_scan(self, guess):
        with pytest.raises(ValidationError):
            find_coupler_resonance(guess, [0.40, 0.41, 0.42])

    def test_untrackable_points_are_skipped(self, uncoupled, monkeypatch):
        solver = CouplerSpectrumSolver()
        exact = solver.crossing_branches

        def patchy(params, flux):
            point = exact(params, flux)
            return replace(point, span=0.3) if flux < 0.42 else point

        monkeypatch.setattr(solver, 'crossing_branches', patchy)
        fluxes = np.arange(0.40, 0.4801, 0.005)
        report = solver.find_resonance(uncoupled, fluxes)
        assert len(report.untrackable) == int(np.sum(fluxes < 0.42))
        assert np.all(np.isnan(report.scan['gap'][fluxes < 0.42]))
        assert np.all(np.isfinite(report.scan['gap'][fluxes >= 0.42]))

    def test_nothing_trackable(self, uncoupled, monkeypatch):
        solver = CouplerSpectrumSolver()
        exact = solver.crossing_branches
        monkeypatch.setattr(solver, 'crossing_branches',
                            lambda params, flux: replace(exact(params, flux), span=0.1))
        with pytest.raises(LabelingError):
            solver.find_resonance(uncoupled, np.arange(0.40, 0.4201, 0.005))


class TestTuning:
    def test_seeds_keep_ancilla_frequency(self, guess):
        candidates = _seed_candidates(guess, 5.211)
        assert candidates[0] == guess
        assert len({(c.E_Ca, c.lambda_sa, c.lambda_sc) for c in candidates[1:]}) \
            == len(candidates) - 1
        for candidate in candidates[1:]:
            estimate = math.sqrt(8 * candidate.E_Ca * candidate.E_Ja) - candidate.E_Ca
            assert estimate == pytest.approx(5.211, abs=1e-9)

    @pytest.mark.slow
    def test_cost_does_not_increase(self):
        result = tune_coupler_model(max_evaluations=8, starts=2)
        assert result.cost <= result.initial_cost
        report = result.to_report()
        assert set(report['residuals']) >= {'omega_c_max', 'crossing'}
