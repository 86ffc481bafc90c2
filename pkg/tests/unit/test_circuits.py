"""Tests for ATS buffer quantization."""

import math

import numpy as np
import pytest

from catqubit_tools.core.circuits import (
    ATSParams,
    ATSQuantizer,
    ats_effective_potential,
    ats_flux_sweep,
    ats_full_potential,
    ats_minimized_potential,
    ats_quantize,
    balance_junction_energy,
    buffer_perturbative,
    flux_line_loss,
    label_dressed_states,
    storage_buffer_nonlinearities,
)
from catqubit_tools.utils.validation import ValidationError


@pytest.fixture
def device():
    return ATSParams.device()


class TestParams:
    def test_derived_quantities(self, device):
        assert device.E_L == pytest.approx(57.1 / 3)
        assert device.phi_zpf == pytest.approx((2 * 0.06 / (57.1 / 3)) ** 0.25)
        assert device.phi_x1 == pytest.approx(math.pi)
        assert device.phi_x2 == pytest.approx(0.0)

    def test_regime_ratio(self, device):
        assert device.regime_ratio == pytest.approx(57.0 / 6054)

    @pytest.mark.parametrize('changes', [{'N': 0}, {'E_J1': -1.0}, {'E_LP2': 0.0},
                                         {'E_C': 0.0}])
    def test_invalid(self, device, changes):
        with pytest.raises(ValidationError):
            device.replace(**changes)


class TestPotentials:
    def test_effective_matches_minimized(self, device):
        # The two potentials differ by a phase-independent constant
        phi = np.linspace(-math.pi, math.pi, 25)
        effective = ats_effective_potential(device, phi)
        minimized = ats_minimized_potential(device, phi)
        np.testing.assert_allclose(effective - effective.min(), minimized - minimized.min(),
                                   atol=2e-2)

    def test_no_serial_inductance(self, device):
        bare = device.replace(E_LP1=math.inf, E_LP2=math.inf)
        phi = np.linspace(-2.0, 2.0, 9)
        np.testing.assert_allclose(ats_effective_potential(bare, phi),
                                   ats_minimized_potential(bare, phi), atol=1e-12)

    def test_minimized_is_below_full(self, device):
        phi = np.linspace(-2.0, 2.0, 9)
        relaxed = ats_full_potential(device, phi, phi + device.phi_x1, phi - device.phi_x2)
        bare = device.replace(E_LP1=math.inf, E_LP2=math.inf)
        np.testing.assert_allclose(relaxed, ats_minimized_potential(bare, phi), atol=1e-12)
        assert np.all(ats_minimized_potential(device, phi) <= relaxed + 1e-9)

    def test_regime_warning(self, device):
        with pytest.warns(RuntimeWarning):
            ats_effective_potential(device.replace(E_LP1=100.0, E_LP2=100.0), [0.0])


class TestPerturbative:
    def test_flux_insensitive_point(self, device):
        omega_b, k_b = buffer_perturbative(device.replace(phi_delta=math.pi / 4))
        e_c, e_l, n = device.E_C, device.E_L, device.N
        assert omega_b == pytest.approx(math.sqrt(8 * e_c * e_l) - e_c / n ** 2)
        assert k_b == pytest.approx(-e_c / n ** 2)

    def test_balance_cancels_kerr(self, device):
        e_j = balance_junction_energy(device)
        assert e_j == pytest.approx(math.sqrt(57.1 * 6054 / (8 * 27)))
        _, k_b = buffer_perturbative(ATSParams.device(E_J=e_j, phi_delta=math.pi / 2))
        assert k_b == pytest.approx(0.0, abs=1e-12)

    def test_asymmetric_junctions(self, device):
        with pytest.raises(ValidationError):
            buffer_perturbative(device.replace(E_J2=10.0))

    def test_infinite_serial_inductance(self, device):
        assert balance_junction_energy(device.replace(E_LP1=math.inf,
                                                      E_LP2=math.inf)) == math.inf


class TestQuantizer:
    def test_matches_perturbative_without_side_junctions(self, device):
        bare = device.replace(E_J1=0.0, E_J2=0.0)
        omega_b, k_b, energies = ats_quantize(bare)
        expected_omega, expected_kerr = buffer_perturbative(bare)
        assert omega_b == pytest.approx(expected_omega, abs=1e-3)
        assert k_b == pytest.approx(expected_kerr, rel=0.05)
        assert np.all(np.diff(energies) > 0)

    def test_converged_at_default_basis(self, device):
        spectrum = ATSQuantizer().quantize(device)
        assert spectrum.convergence_shift is not None
        assert spectrum.convergence_shift < 1e-6

    def test_minimum_basis(self):
        with pytest.raises(ValidationError):
            ATSQuantizer(oscillator_dim=5)

    def test_flux_sweep_columns(self, device):
        sweep = ats_flux_sweep(device, [0.0, math.pi / 4, math.pi / 2])
        assert set(sweep) == {'phi_delta', 'omega_b', 'K_b', 'omega_b_perturbative',
                              'K_b_perturbative'}
        np.testing.assert_allclose(sweep['omega_b'], sweep['omega_b_perturbative'], atol=3e-2)

    def test_asymmetric_sweep_has_no_estimate(self, device):
        sweep = ats_flux_sweep(device.replace(E_J2=40.0), [math.pi / 2])
        assert math.isnan(sweep['omega_b_perturbative'][0])


class TestStorageNonlinearities:
    def test_uncoupled(self, device):
        k_s, chi_sb = storage_buffer_nonlinearities(device, 0.0, 5.3)
        assert k_s == pytest.approx(0.0, abs=1e-10)
        assert chi_sb == pytest.approx(0.0, abs=1e-10)

    def test_kerr_scales_as_fourth_power(self, device):
        quantizer = ATSQuantizer()
        weak = quantizer.storage_buffer_nonlinearities(device, 0.05, 5.3)
        strong = quantizer.storage_buffer_nonlinearities(device, 0.1, 5.3)
        assert strong.K_s / weak.K_s == pytest.approx(16.0, rel=0.1)
        assert strong.chi_sb / weak.chi_sb == pytest.approx(4.0, rel=0.1)
        assert min(strong.overlaps.values()) > 0.5


class TestHelpers:
    def test_label_identity(self):
        indices, overlaps = label_dressed_states(np.eye(6), (3, 2), {(0, 0), (1, 1)})
        assert indices == {(0, 0): 0, (1, 1): 3}
        assert overlaps[(1, 1)] == pytest.approx(1.0)

    def test_label_follows_permutation(self):
        states = np.eye(4)[:, [1, 0, 3, 2]]
        indices, _ = label_dressed_states(states, (2, 2), {(0, 0), (1, 0)})
        assert indices == {(0, 0): 1, (1, 0): 3}

    def test_flux_line_loss_scaling(self):
        base = flux_line_loss(50.0, 50.0, 1e-12, 0.3, 7.0)
        assert base > 0
        assert flux_line_loss(50.0, 50.0, 2e-12, 0.3, 7.0) == pytest.approx(4 * base)
        assert flux_line_loss(0.0, 0.0, 1e-12, 0.3, 7.0) == 0.0

    def test_custom_noise_spectrum(self):
        value = flux_line_loss(50.0, 50.0, 1e-12, 0.3, 7.0, spectrum=lambda omega: 0.0)
        assert value == 0.0
