"""Tests for the emulated calibration experiments."""

import math

import numpy as np
import pytest

from catqubit_tools.core.calibration import (
    CalibrationEmulator,
    CalibrationResult,
    emulate_conditional_phase,
    emulate_displacement_calibration,
    emulate_g2_fit,
    emulate_off_position_chi,
)
from catqubit_tools.core.catmodel import CatParams
from catqubit_tools.core.dynamics import MasterEquationSolver
from catqubit_tools.core.fock import phase_space_grid
from catqubit_tools.core.metrology import ShotModel
from catqubit_tools.utils.validation import ValidationError


class TestCalibrationResult:
    def test_relative_error(self):
        result = CalibrationResult('g2', injected=2.0, recovered=2.1)
        assert result.relative_error == pytest.approx(0.05)
        assert result.identifiable

    def test_zero_injection(self):
        assert CalibrationResult('kerr', 0.0, -0.2).relative_error == pytest.approx(0.2)

    def test_report(self):
        report = CalibrationResult('g2', 1.0, 1.0, flagged=['unidentifiable']).to_report()
        assert report['calibration'] == 'g2'
        assert report['flagged'] == ['unidentifiable']
        assert report['relative_error'] == 0.0


class TestEmulator:
    def test_solver_must_store_states(self):
        with pytest.raises(ValidationError):
            CalibrationEmulator(solver=MasterEquationSolver(store_states=False))

    def test_unknown_calibration(self):
        with pytest.raises(ValidationError):
            CalibrationEmulator().run('flux')

    def test_dispatch(self):
        result = CalibrationEmulator().run('displacement', scale_true=1.1)
        assert result.name == 'displacement'

    def test_lobe_radius(self):
        axis = np.arange(-3.0, 3.0 + 1e-9, 0.2)
        points = phase_space_grid(axis, axis).ravel()
        center = 1.2 + 0.5j
        values = (np.exp(-2 * np.abs(points - center) ** 2)
                  + np.exp(-2 * np.abs(points + center) ** 2))
        radius_sq, converged = CalibrationEmulator.lobe_radius_sq(points, values)
        assert converged
        assert radius_sq == pytest.approx(abs(center) ** 2, rel=1e-6)

    def test_lobe_radius_ignores_central_fringe(self):
        axis = np.arange(-3.5, 3.5 + 1e-9, 0.1)
        points = phase_space_grid(axis, axis).ravel()
        center = 2.0
        lobes = (np.exp(-2 * np.abs(points - center) ** 2)
                 + np.exp(-2 * np.abs(points + center) ** 2))
        fringe = 2 * np.exp(-2 * np.abs(points) ** 2) * np.cos(4 * center * points.imag)
        values = lobes + fringe
        assert abs(points[int(np.argmax(values))]) < 0.1
        radius_sq, converged = CalibrationEmulator.lobe_radius_sq(points, values)
        assert converged
        assert radius_sq == pytest.approx(center ** 2, rel=0.01)


class TestDisplacement:
    def test_noiseless(self):
        result = emulate_displacement_calibration(1.2)
        assert result.recovered == pytest.approx(1.2, rel=1e-6)
        assert result.secondary['contrast'] == pytest.approx(1.0, rel=1e-6)

    def test_with_shots(self):
        result = emulate_displacement_calibration(1.2, ShotModel(n_shots=2000, seed=3))
        assert result.relative_error < 0.05

    def test_shots_are_reproducible(self):
        first = emulate_displacement_calibration(0.9, ShotModel(n_shots=200, seed=11))
        second = emulate_displacement_calibration(0.9, ShotModel(n_shots=200, seed=11))
        assert first.recovered == second.recovered
        np.testing.assert_array_equal(first.data['parity'], second.data['parity'])


class TestConditionalPhase:
    def test_noiseless(self):
        result = emulate_conditional_phase(2.0)
        assert result.recovered == pytest.approx(2.0, rel=1e-4)
        assert result.secondary['pi_pulse_length'] == pytest.approx(math.pi / 2.0, rel=1e-3)

    def test_negative_shift(self):
        result = emulate_conditional_phase(-1.5, pulse_lengths=np.linspace(0.0, 1.5, 7))
        assert result.recovered == pytest.approx(-1.5, rel=1e-4)

    def test_bad_fringe(self):
        with pytest.raises(ValidationError):
            emulate_conditional_phase(1.0, contrast=0.99, offset=0.05)


class TestG2:
    def test_noiseless_recovery(self):
        params = CatParams(g2=1.0, alpha_sq=0.0, kappa_b=4.0)
        result = CalibrationEmulator().g2_fit(params, t_grid=np.linspace(0.0, 4.0, 21),
                                              initial_g2=0.5, storage_dim=24, beta_sq=4.0)
        assert result.relative_error < 1e-3
        assert result.secondary['kappa_2_injected'] == pytest.approx(1.0)
        assert result.identifiable

    def test_weak_dissipation_is_flagged(self):
        params = CatParams(g2=0.05, alpha_sq=0.0, kappa_b=4.0)
        result = CalibrationEmulator().g2_fit(params, t_grid=np.linspace(0.0, 4.0, 11),
                                              initial_g2=0.05, storage_dim=24, beta_sq=4.0)
        assert not result.identifiable

    def test_module_entry_point(self):
        params = CatParams(g2=1.0, alpha_sq=0.0, kappa_b=4.0)
        result = emulate_g2_fit(params, t_grid=np.linspace(0.0, 4.0, 21), initial_g2=0.5,
                                storage_dim=24, beta_sq=4.0)
        assert result.name == 'g2'
        assert result.relative_error < 1e-3

    def test_guard(self):
        params = CatParams(g2=1.0, alpha_sq=0.0, kappa_b=4.0)
        with pytest.raises(ValidationError):
            CalibrationEmulator().g2_fit(params, storage_dim=20, beta_sq=8.0)


class TestOffPositionChi:
    def test_small_shift(self):
        chi = 2 * math.pi * 1e-3
        result = CalibrationEmulator().off_position_chi(chi, alpha_sq_list=[0.0, 4.0, 8.0],
                                                        storage_dim=48)
        assert result.recovered == pytest.approx(chi, rel=0.05)

    def test_default_ancilla_coherence(self):
        chi = -2 * math.pi * 1e-3
        result = emulate_off_position_chi(chi, alpha_sq_list=[0.0, 4.0, 8.0], storage_dim=48)
        assert result.recovered == pytest.approx(chi, rel=0.05)

    def test_finite_ancilla_coherence(self):
        chi = 2 * math.pi * 1e-3
        result = CalibrationEmulator().off_position_chi(chi, alpha_sq_list=[0.0, 4.0, 8.0],
                                                        ancilla_t2=40.0, storage_dim=48)
        assert result.recovered == pytest.approx(chi, rel=0.05)

    @pytest.mark.parametrize('ancilla_t2', [0.0, -1.0, math.nan])
    def test_invalid_ancilla_coherence(self, ancilla_t2):
        with pytest.raises(ValidationError):
            CalibrationEmulator().off_position_chi(1e-3, ancilla_t2=ancilla_t2)
