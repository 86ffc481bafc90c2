"""Physics-level checks of the stabilized cat models."""

import math

import numpy as np
import pytest

from catqubit_tools.core.calibration import (
    CalibrationEmulator,
    emulate_buffer_amp_calibration,
    emulate_kerr_ramsey,
    emulate_off_position_chi,
    emulate_storage_coherence,
)
from catqubit_tools.core.catmodel import (
    CatExperimentRunner,
    CatParams,
    PulseSchedule,
    build_effective,
    kerr_reapportioned_alpha,
)
from catqubit_tools.core.circuits import ATSParams, ATSQuantizer, balance_junction_energy
from catqubit_tools.core.coupler import CouplerSpectrumSolver, tune_coupler_model
from catqubit_tools.core.dynamics import MasterEquationSolver
from catqubit_tools.core.floquet import (
    DESIRED_CONDITION,
    find_resonances,
    resonance_condition,
    stark_scan,
    storage_buffer_system,
)
from catqubit_tools.core.fock import (
    FockSpace,
    Operator,
    annihilation,
    expect,
    fock_state,
    manifold_fidelity,
)
from catqubit_tools.core.metrology import ShotModel, fit_bitflip_scaling, fit_phaseflip_linear
from catqubit_tools.utils.constants import DEVICE_COUPLER_TARGETS

pytestmark = [pytest.mark.slow, pytest.mark.integration]


def _single_crossing(x, y):
    """Linear-interpolated zero of a sampled curve with exactly one sign change."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    changes = np.nonzero(np.diff(np.sign(y)) != 0)[0]
    assert changes.size == 1
    i = changes[0]
    return x[i] - y[i] * (x[i + 1] - x[i]) / (y[i + 1] - y[i])


class TestTwoPhotonStabilization:
    def test_vacuum_relaxes_into_cat_manifold(self, ideal_params):
        generator = build_effective(ideal_params, 25)
        vacuum = fock_state(FockSpace(25, 'storage'), 0)
        result = MasterEquationSolver().evolve(generator, vacuum, np.linspace(0.0, 10.0, 6))
        assert manifold_fidelity(result.final_state, ideal_params.alpha) >= 0.999

    def test_bit_flip_time_grows_exponentially(self):
        runner = CatExperimentRunner()
        alpha_sq = [2.0, 3.0, 4.0, 5.0]
        times = [runner.bit_flip_rate(CatParams.device_defaults(n, with_nonlinearity=False),
                                      'effective_exact').flip_time
                 for n in alpha_sq]
        assert np.all(np.diff(times) > 0)
        scaling = fit_bitflip_scaling(alpha_sq, times)
        assert 1.5 <= scaling.exponent <= 2.5

    def test_phase_flip_rate_is_linear_in_photon_number(self, ideal_params):
        kappa_1 = 1.0 / 74.0
        alpha_sq = [1.0, 2.0, 3.0, 4.0]
        runner = CatExperimentRunner()
        rates = []
        for n in alpha_sq:
            params = ideal_params.replace(alpha_sq=n, kappa_1=kappa_1)
            t_grid = np.linspace(0.0, 1.0 / (kappa_1 * n), 21)
            rates.append(runner.phase_flip_rate(params, 'effective_exact', t_grid).rate)
        fit = fit_phaseflip_linear(alpha_sq, rates)
        assert fit.slope_origin == pytest.approx(kappa_1, rel=0.05)
        assert fit.t1_eff_origin == pytest.approx(74.0, rel=0.05)


class TestCalibrationRecovery:
    def test_g2_with_shot_noise(self):
        params = CatParams(g2=1.0, alpha_sq=0.0, kappa_b=4.0)
        emulator = CalibrationEmulator(shot_model=ShotModel(2000, seed=3))
        result = emulator.g2_fit(params, t_grid=np.linspace(0.0, 4.0, 41), initial_g2=0.5,
                                 storage_dim=24, beta_sq=4.0)
        assert result.relative_error < 0.05

    def test_storage_kerr(self):
        kerr = 2 * math.pi * 1e-3
        assert emulate_kerr_ramsey(kerr).recovered == pytest.approx(kerr, rel=0.05)

    def test_off_position_cross_kerr(self):
        chi = -2 * math.pi * 1.4e-3
        result = emulate_off_position_chi(chi)
        assert result.recovered == pytest.approx(chi, abs=2 * math.pi * 1e-4)

    def test_storage_coherence(self):
        params = CatParams(g2=1.0, alpha_sq=0.0, kappa_b=4.0, kappa_1=1 / 79.0,
                           kappa_phi=2 / 116.0 - 1 / 79.0)
        result = emulate_storage_coherence(params)
        assert result.recovered == pytest.approx(79.0, rel=0.02)
        assert result.secondary['t2_recovered'] == pytest.approx(116.0, rel=0.05)

    def test_buffer_drive_amplitude_map(self):
        params = CatParams(g2=1.0, alpha_sq=0.0, kappa_b=4.0)
        result = emulate_buffer_amp_calibration(params, [2.0, 3.0, 4.0], 1.0)
        assert not result.flagged
        assert result.recovered == pytest.approx(1.0, rel=0.1)


class TestDeviceNonlinearity:
    def test_bit_flip_exponent_with_device_rates(self):
        runner = CatExperimentRunner(storage_dim=30)
        alpha_sq = [1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0]
        times = [runner.bit_flip_rate(CatParams.device_defaults(n), 'effective_exact').flip_time
                 for n in alpha_sq]
        assert np.all(np.diff(times) > 0)
        assert 1.7 <= fit_bitflip_scaling(alpha_sq, times).exponent <= 2.3

    def test_exact_elimination_tracks_two_mode_model(self):
        params = CatParams.device_defaults(2.0).doubled_nonlinearity()
        runner = CatExperimentRunner(storage_dim=20)
        t_grid = np.linspace(0.0, 10.0, 21)
        traces = {kind: runner.run_bit_flip(params, kind, t_grid).expectations['Z']
                  for kind in ('full', 'effective_exact', 'effective_first_order')}
        exact_error = np.linalg.norm(traces['effective_exact'] - traces['full'])
        first_error = np.linalg.norm(traces['effective_first_order'] - traces['full'])
        assert 3 * exact_error <= first_error

    def test_kerr_rotates_steady_amplitude(self):
        params = CatParams(g2=1.0, alpha_sq=2.0, kappa_b=4.0)
        kerr = params.replace(K_s=params.kappa2 / 10)
        generator = build_effective(kerr, 20)
        vacuum = fock_state(FockSpace(20, 'storage'), 0)
        result = MasterEquationSolver().evolve(generator, vacuum, np.linspace(0.0, 20.0, 5))
        a = annihilation(generator.space).matrix
        value = expect(Operator(generator.space, a @ a), result.final_state)
        expected = kerr_reapportioned_alpha(2.0, kerr.K_s, kerr.kappa2)
        assert abs(value - expected) <= 0.01 * abs(expected)

    def test_kerr_leaves_bit_flip_gap(self, noisy_params):
        runner = CatExperimentRunner(storage_dim=20)
        base = runner.bit_flip_rate(noisy_params, 'effective_exact').rate
        kerr = noisy_params.replace(K_s=noisy_params.kappa2 / 10)
        shifted = runner.bit_flip_rate(kerr, 'effective_exact').rate
        assert shifted == pytest.approx(base, rel=0.1)


class TestPulsedStabilization:
    CYCLE = 3.0

    @pytest.fixture
    def runner(self):
        return CatExperimentRunner()

    def _rate(self, runner, alpha_sq, t_on=None):
        params = CatParams.device_defaults(alpha_sq, kappa_phi_factor=0.5)
        schedule = None if t_on is None else PulseSchedule(t_cycle=self.CYCLE, t_on=t_on)
        return runner.bit_flip_rate(params, 'effective_exact', schedule=schedule).rate

    @pytest.mark.parametrize('alpha_sq', [2.0, 4.0])
    def test_one_third_duty_matches_static(self, runner, alpha_sq):
        static = self._rate(runner, alpha_sq)
        pulsed = self._rate(runner, alpha_sq, self.CYCLE / 3)
        assert static / 2 <= pulsed <= 2 * static

    def test_short_duty_degrades_large_cats(self, runner):
        assert self._rate(runner, 6.0, 0.2) > self._rate(runner, 6.0, self.CYCLE / 3)


class TestBufferCircuit:
    SIDE_JUNCTIONS = np.arange(30.0, 50.0 + 1e-9, 2.0)

    def test_flux_modulation_needs_serial_inductance(self):
        quantizer = ATSQuantizer()
        phi_delta = [0.0, math.pi / 4, math.pi / 2, math.pi]
        finite = quantizer.flux_sweep(ATSParams.device(), phi_delta)['omega_b']
        bare = ATSParams.device().replace(E_LP1=math.inf, E_LP2=math.inf)
        flat = quantizer.flux_sweep(bare, phi_delta)['omega_b']
        assert finite[0] == pytest.approx(finite[3], abs=1e-9)
        assert abs(finite[0] - finite[2]) > 1e-3
        assert np.ptp(flat) < 1e-9

    def test_nonlinearities_vanish_at_balance(self):
        quantizer = ATSQuantizer()
        balance = balance_junction_energy(ATSParams.device())
        k_b, k_s, chi_sb = [], [], []
        for e_j in self.SIDE_JUNCTIONS:
            params = ATSParams.device(E_J=float(e_j))
            k_b.append(quantizer.quantize(params).K_b)
            storage = quantizer.storage_buffer_nonlinearities(params, 0.1, 5.3)
            k_s.append(storage.K_s)
            chi_sb.append(storage.chi_sb)
        zero = _single_crossing(self.SIDE_JUNCTIONS, k_b)
        assert zero == pytest.approx(balance, rel=0.1)
        assert _single_crossing(self.SIDE_JUNCTIONS, k_s) == pytest.approx(zero, abs=0.1 * balance)
        assert _single_crossing(self.SIDE_JUNCTIONS, chi_sb) == \
            pytest.approx(zero, abs=0.1 * balance)


class TestTunableCoupler:
    @pytest.fixture(scope='class')
    def tuned(self):
        return tune_coupler_model().params

    @pytest.mark.parametrize('flux,target', [(0.5, 'chi_sa_half'), (0.38, 'chi_sa_038')])
    def test_dispersive_shift(self, tuned, flux, target):
        chi_sa = CouplerSpectrumSolver().spectrum(tuned, flux).chi_sa
        assert chi_sa == pytest.approx(DEVICE_COUPLER_TARGETS[target], rel=0.05)

    def test_crossing_location(self, tuned):
        resonance = CouplerSpectrumSolver().find_resonance(tuned, np.arange(0.40, 0.4801, 0.0025))
        assert resonance.found
        assert resonance.flux == pytest.approx(DEVICE_COUPLER_TARGETS['crossing_flux'], abs=0.01)


class TestFloquetOnQuantizedBuffer:
    STEP = 0.005

    @pytest.fixture(scope='class')
    def static(self):
        return storage_buffer_system(ATSParams(E_C=0.25, E_J_array=5.0, N=1, E_J1=10.0,
                                               E_J2=10.0), 5.35, 0.1)

    @pytest.fixture(scope='class')
    def grid(self, static):
        target = resonance_condition(*DESIRED_CONDITION, static.frequency((1, 0)),
                                     static.frequency((0, 1)))
        return np.arange(target - 0.1, target + 0.1 + 1e-9, self.STEP)

    def test_undriven_scan_is_flat(self, static, grid):
        scan = stark_scan(static, grid, [0.0])
        np.testing.assert_allclose(scan.omega_b, static.frequency((0, 1)), atol=1e-9)
        assert find_resonances(scan).resonances == []

    def test_desired_resonance_location(self, static, grid):
        report = find_resonances(stark_scan(static, grid, [0.1]))
        assert report.desired
        for resonance in report.resonances:
            if resonance.condition is not None:
                assert abs(resonance.omega_p - resonance.predicted_omega_p) <= self.STEP
