"""
Circuit quantization of the ATS buffer for catqubit-tools.

This module provides the ATS potential with serial inductances (effective,
full three-node and numerically minimized forms), the perturbative and
numerical buffer frequency and self-Kerr, the storage nonlinearities
inherited through a linear storage-buffer coupling, and the flux-line
induced buffer loss.

Units: energies and frequencies in GHz with h = 1, fluxes in radians.
"""

import logging
import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import constants as si
from scipy.linalg import eigh
from scipy.optimize import linear_sum_assignment, minimize_scalar

from ..utils.constants import (
    ATS_DEVICE_PARAMETERS,
    ATS_REGIME_RATIO_LIMIT,
    DEFAULT_OSCILLATOR_DIM,
    ERROR_MESSAGES,
    LABEL_OVERLAP_FLOOR,
    MIN_OSCILLATOR_DIM,
    OMEGA_B_CONVERGENCE_GHZ,
    OSCILLATOR_CONVERGENCE_STEP,
)
from ..utils.validation import (
    LabelingError,
    SpectralError,
    TruncationError,
    ValidationError,
    validate_dimension,
    validate_finite_array,
    validate_positive,
)

logger = logging.getLogger(__name__)

FLUX_QUANTUM = si.h / (2 * si.e)


@dataclass(frozen=True)
class ATSParams:
    """Asymmetrically threaded SQUID with serial inductances (GHz, radians)."""

    E_C: float
    E_J_array: float
    N: int
    E_J1: float
    E_J2: float
    E_LP1: float = math.inf
    E_LP2: float = math.inf
    phi_sigma: float = math.pi / 2
    phi_delta: float = math.pi / 2

    def __post_init__(self):
        validate_positive(self.E_C, 'E_C')
        validate_positive(self.E_J_array, 'E_J_array')
        if int(self.N) < 1:
            raise ValidationError(f"N must be >= 1, got {self.N}", 'N')
        for name in ('E_J1', 'E_J2'):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be >= 0", name)
        for name in ('E_LP1', 'E_LP2'):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be > 0", name)

    @property
    def E_L(self) -> float:
        return self.E_J_array / self.N

    @property
    def phi_zpf(self) -> float:
        return (2.0 * self.E_C / self.E_L) ** 0.25

    @property
    def phi_x1(self) -> float:
        return self.phi_sigma + self.phi_delta

    @property
    def phi_x2(self) -> float:
        return self.phi_sigma - self.phi_delta

    @property
    def regime_ratio(self) -> float:
        """Largest E_J / E_LP over the two branches."""
        return max(self.E_J1 / self.E_LP1, self.E_J2 / self.E_LP2)

    def replace(self, **changes) -> 'ATSParams':
        return replace(self, **changes)

    @classmethod
    def device(cls, E_J: Optional[float] = None, phi_delta: float = math.pi / 2) -> 'ATSParams':
        """Device-like buffer with symmetric side junctions."""
        e_j = ATS_DEVICE_PARAMETERS['E_J'] if E_J is None else E_J
        return cls(
            E_C=ATS_DEVICE_PARAMETERS['E_C'],
            E_J_array=ATS_DEVICE_PARAMETERS['E_J_array'],
            N=ATS_DEVICE_PARAMETERS['N'],
            E_J1=e_j,
            E_J2=e_j,
            E_LP1=ATS_DEVICE_PARAMETERS['E_LP'],
            E_LP2=ATS_DEVICE_PARAMETERS['E_LP'],
            phi_delta=phi_delta,
        )


@dataclass
class BufferSpectrum:
    """Quantized buffer levels."""

    omega_b: float
    K_b: float
    energies: np.ndarray
    oscillator_dim: int
    convergence_shift: Optional[float] = None


@dataclass
class StorageBufferNonlinearities:
    """Dressed storage nonlinearities inherited from the buffer."""

    K_s: float
    chi_sb: float
    omega_s: float
    omega_b: float
    overlaps: Dict[Tuple[int, int], float]


def _check_regime(params: ATSParams):
    if params.regime_ratio > ATS_REGIME_RATIO_LIMIT:
        warnings.warn(
            f"E_J/E_LP = {params.regime_ratio:.3g} exceeds {ATS_REGIME_RATIO_LIMIT}; "
            "the serial-inductance expansion degrades",
            RuntimeWarning,
        )


def ats_effective_potential(params: ATSParams, phi: Sequence[float]) -> np.ndarray:
    """
    Buffer potential with the serial-inductance nodes eliminated.

    V = -N E_Ja cos(phi/N) - E_J1 cos(phi + phi_x1) - E_J2 cos(phi - phi_x2)
        + E_J1^2/(4 E_LP1) cos(2(phi + phi_x1)) + E_J2^2/(4 E_LP2) cos(2(phi - phi_x2))

    Args:
        params: ATS parameters
        phi: Buffer phase values

    Returns:
        Potential in GHz
    """
    _check_regime(params)
    phi = np.asarray(phi, dtype=float)
    theta_1 = phi + params.phi_x1
    theta_2 = phi - params.phi_x2
    potential = (-params.N * params.E_J_array * np.cos(phi / params.N)
                 - params.E_J1 * np.cos(theta_1) - params.E_J2 * np.cos(theta_2))
    potential = potential + params.E_J1 ** 2 / (4 * params.E_LP1) * np.cos(2 * theta_1)
    potential = potential + params.E_J2 ** 2 / (4 * params.E_LP2) * np.cos(2 * theta_2)
    return potential


def ats_full_potential(params: ATSParams, phi: Sequence[float], phi_p1: Sequence[float],
                       phi_p2: Sequence[float]) -> np.ndarray:
    """Three-node potential with junction phases phi_p1, phi_p2 as free coordinates."""
    phi = np.asarray(phi, dtype=float)
    phi_p1 = np.asarray(phi_p1, dtype=float)
    phi_p2 = np.asarray(phi_p2, dtype=float)
    potential = -params.N * params.E_J_array * np.cos(phi / params.N)
    potential = potential + _branch_energy(params.E_J1, params.E_LP1,
                                           phi + params.phi_x1, phi_p1)
    potential = potential + _branch_energy(params.E_J2, params.E_LP2,
                                           phi - params.phi_x2, phi_p2)
    return potential


def _branch_energy(e_j: float, e_lp: float, theta, phi_p):
    if math.isinf(e_lp):
        return -e_j * np.cos(theta)
    return -e_j * np.cos(phi_p) + 0.5 * e_lp * (theta - phi_p) ** 2


def _minimize_branch(e_j: float, e_lp: float, theta: float, grid_points: int) -> float:
    if math.isinf(e_lp) or e_j == 0:
        return float(-e_j * math.cos(theta))
    trial = theta + np.linspace(-math.pi, math.pi, grid_points)
    energies = _branch_energy(e_j, e_lp, theta, trial)
    best = int(np.argmin(energies))
    step = trial[1] - trial[0]
    result = minimize_scalar(lambda x: float(_branch_energy(e_j, e_lp, theta, x)),
                             bounds=(trial[best] - step, trial[best] + step), method='bounded',
                             options={'xatol': 1e-12})
    return float(min(result.fun, energies[best]))


def ats_minimized_potential(params: ATSParams, phi: Sequence[float],
                            grid_points: int = 721) -> np.ndarray:
    """
    Full potential minimized over the serial nodes at each buffer phase.

    The two branches are independent, so each is minimized on its own by a
    grid search refined with a bounded scalar minimization.
    """
    phi = np.asarray(phi, dtype=float)
    values = []
    for value in phi.ravel():
        energy = -params.N * params.E_J_array * math.cos(value / params.N)
        energy += _minimize_branch(params.E_J1, params.E_LP1, value + params.phi_x1, grid_points)
        energy += _minimize_branch(params.E_J2, params.E_LP2, value - params.phi_x2, grid_points)
        values.append(energy)
    return np.array(values).reshape(phi.shape)


def balance_junction_energy(params: ATSParams) -> float:
    """Side-junction energy where K_b vanishes: sqrt(E_J_array E_LP / (8 N^3))."""
    if not math.isclose(params.E_LP1, params.E_LP2):
        raise ValidationError("Balance point needs equal serial inductances", 'E_LP2')
    if math.isinf(params.E_LP1):
        return math.inf
    return math.sqrt(params.E_J_array * params.E_LP1 / (8 * params.N ** 3))


def buffer_perturbative(params: ATSParams) -> Tuple[float, float]:
    """
    Perturbative buffer frequency and self-Kerr for symmetric side junctions.

    omega_b = sqrt(8 E_C E_L) - E_C/N^2 + (2 E_J^2/E_LP) sqrt(2 E_C/E_L) cos(2 phi_delta)
    K_b = -E_C/N^2 - (8 E_C E_J^2/(E_LP E_L)) cos(2 phi_delta)

    Args:
        params: ATS parameters with E_J1 = E_J2 and E_LP1 = E_LP2

    Returns:
        (omega_b, K_b) in GHz

    Raises:
        ValidationError: If the side junctions are not symmetric
    """
    if not (math.isclose(params.E_J1, params.E_J2) and math.isclose(params.E_LP1, params.E_LP2)):
        raise ValidationError("Perturbative formula needs E_J1 = E_J2 and E_LP1 = E_LP2",
                              'E_J2')
    e_c, e_l, n = params.E_C, params.E_L, params.N
    correction = params.E_J1 ** 2 / params.E_LP1 * math.cos(2 * params.phi_delta)
    omega_b = math.sqrt(8 * e_c * e_l) - e_c / n ** 2 + 2 * correction * math.sqrt(2 * e_c / e_l)
    k_b = -e_c / n ** 2 - 8 * e_c * correction / e_l
    return omega_b, k_b


def oscillator_operators(dim: int, phi_zpf: float) -> Tuple[np.ndarray, np.ndarray]:
    """Phase and charge operators in a harmonic-oscillator basis, [phi, n] = i."""
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1)
    phi = phi_zpf * (a + a.T)
    charge = 1j / (2 * phi_zpf) * (a.T - a)
    return phi, charge


def _matrix_function(matrix: np.ndarray, function: Callable[[np.ndarray], np.ndarray]
                     ) -> np.ndarray:
    values, vectors = np.linalg.eigh(matrix)
    return (vectors * function(values)) @ vectors.conj().T


class ATSQuantizer:
    """Numerical quantization of the ATS buffer in the array-inductance oscillator basis."""

    def __init__(self, oscillator_dim: int = DEFAULT_OSCILLATOR_DIM,
                 check_convergence: bool = True):
        """
        Initialize ATS quantizer.

        Args:
            oscillator_dim: Oscillator basis size
            check_convergence: Compare against oscillator_dim + 5 and fail on drift
        """
        self.oscillator_dim = validate_dimension(oscillator_dim, MIN_OSCILLATOR_DIM,
                                                 'oscillator_dim')
        self.check_convergence = check_convergence

    def hamiltonian(self, params: ATSParams, dim: Optional[int] = None) -> np.ndarray:
        """H = 4 E_C n^2 + V_eff(phi) as a dense matrix."""
        dim = dim or self.oscillator_dim
        phi, charge = oscillator_operators(dim, params.phi_zpf)
        kinetic = 4 * params.E_C * np.real(charge @ charge)
        potential = _matrix_function(phi, lambda x: ats_effective_potential(params, x))
        return kinetic + np.real(potential)

    def eigensystem(self, params: ATSParams, dim: Optional[int] = None
                    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Buffer eigenenergies, eigenvectors and the phase operator.

        Returns:
            (energies, vectors, phi) in the oscillator basis
        """
        dim = dim or self.oscillator_dim
        try:
            energies, vectors = eigh(self.hamiltonian(params, dim))
        except Exception as e:
            raise SpectralError(ERROR_MESSAGES['spectral_failure'].format(error=e)) from e
        phi, _ = oscillator_operators(dim, params.phi_zpf)
        return energies, vectors, phi

    def quantize(self, params: ATSParams) -> BufferSpectrum:
        """
        Buffer frequency and self-Kerr from the lowest three levels.

        Args:
            params: ATS parameters

        Returns:
            BufferSpectrum with omega_b = E1 - E0 and K_b = E2 - 2 E1 + E0

        Raises:
            TruncationError: If omega_b moves by more than 1 kHz when the basis grows by 5
        """
        energies, _, _ = self.eigensystem(params)
        omega_b = float(energies[1] - energies[0])
        k_b = float(energies[2] - 2 * energies[1] + energies[0])
        shift = None
        if self.check_convergence:
            larger_dim = self.oscillator_dim + OSCILLATOR_CONVERGENCE_STEP
            larger, _, _ = self.eigensystem(params, larger_dim)
            shift = abs(float(larger[1] - larger[0]) - omega_b)
            if shift > OMEGA_B_CONVERGENCE_GHZ:
                raise TruncationError(
                    f"Buffer frequency not converged: shift {shift:.3g} GHz between "
                    f"{self.oscillator_dim} and {larger_dim}",
                    'oscillator_dim',
                )
        return BufferSpectrum(omega_b, k_b, energies[:10].copy(), self.oscillator_dim, shift)

    def flux_sweep(self, params: ATSParams, phi_delta_list: Sequence[float]
                   ) -> Dict[str, np.ndarray]:
        """Numerical and (for symmetric junctions) perturbative omega_b, K_b versus phi_delta."""
        phi_deltas = validate_finite_array(phi_delta_list, 'phi_delta_list')
        symmetric = (math.isclose(params.E_J1, params.E_J2)
                     and math.isclose(params.E_LP1, params.E_LP2))
        rows = {'phi_delta': phi_deltas, 'omega_b': [], 'K_b': [],
                'omega_b_perturbative': [], 'K_b_perturbative': []}
        for phi_delta in phi_deltas:
            point = params.replace(phi_delta=float(phi_delta))
            spectrum = self.quantize(point)
            rows['omega_b'].append(spectrum.omega_b)
            rows['K_b'].append(spectrum.K_b)
            estimate = buffer_perturbative(point) if symmetric else (math.nan, math.nan)
            rows['omega_b_perturbative'].append(estimate[0])
            rows['K_b_perturbative'].append(estimate[1])
        return {key: np.asarray(value, dtype=float) for key, value in rows.items()}

    def storage_buffer_nonlinearities(self, params: ATSParams, g_sb: float, omega_s0: float,
                                      storage_dim: int = 8, buffer_levels: int = 10
                                      ) -> StorageBufferNonlinearities:
        """
        Storage self-Kerr and storage-buffer cross-Kerr of the coupled system.

        A linear storage mode couples as g_sb (a + a^dag)(b + b^dag) with
        b + b^dag = phi / phi_zpf; the joint Hamiltonian is diagonalized in
        the storage Fock x buffer eigenbasis and dressed levels are labeled
        by maximum overlap.

        Args:
            params: ATS parameters
            g_sb: Linear coupling (GHz)
            omega_s0: Bare storage frequency (GHz)
            storage_dim: Storage levels kept
            buffer_levels: Buffer eigenstates kept

        Returns:
            StorageBufferNonlinearities with K_s and chi_sb in GHz

        Raises:
            LabelingError: If a required level has overlap below 0.5
        """
        validate_dimension(storage_dim, 3, 'storage_dim')
        validate_dimension(buffer_levels, 2, 'buffer_levels')
        energies, vectors, phi = self.eigensystem(params)
        kept = vectors[:, :buffer_levels]
        buffer_energies = energies[:buffer_levels] - energies[0]
        coupling_b = kept.T @ (phi / params.phi_zpf) @ kept
        a = np.diag(np.sqrt(np.arange(1, storage_dim, dtype=float)), 1)
        hamiltonian = (np.kron(omega_s0 * np.diag(np.arange(storage_dim, dtype=float)),
                               np.eye(buffer_levels))
                       + np.kron(np.eye(storage_dim), np.diag(buffer_energies))
                       + g_sb * np.kron(a + a.T, coupling_b))
        dressed, states = eigh(hamiltonian)
        labels = {(0, 0), (1, 0), (0, 1), (2, 0), (1, 1)}
        levels, overlaps = label_dressed_states(states, (storage_dim, buffer_levels), labels)
        energy = {label: dressed[index] for label, index in levels.items()}
        for label, overlap in overlaps.items():
            if overlap < LABEL_OVERLAP_FLOOR:
                raise LabelingError(ERROR_MESSAGES['label_failure'].format(label=label,
                                                                           overlap=overlap))
        e00 = energy[(0, 0)]
        return StorageBufferNonlinearities(
            K_s=float(energy[(2, 0)] - 2 * energy[(1, 0)] + e00),
            chi_sb=float(energy[(1, 1)] - energy[(1, 0)] - energy[(0, 1)] + e00),
            omega_s=float(energy[(1, 0)] - e00),
            omega_b=float(energy[(0, 1)] - e00),
            overlaps=overlaps,
        )


def label_dressed_states(states: np.ndarray, dims: Sequence[int], labels
                         ) -> Tuple[Dict[Tuple[int, ...], int], Dict[Tuple[int, ...], float]]:
    """
    Assign dressed eigenvectors to bare product labels by maximum overlap.

    The assignment is a bijection between bare product states and dressed
    states (Hungarian algorithm on the overlap matrix), so it does not
    depend on the eigen-solver ordering.

    Args:
        states: Dressed eigenvectors as columns, in the bare product basis
        dims: Bare dimensions of each factor
        labels: Bare labels to report

    Returns:
        (dressed index per label, overlap per label)
    """
    weights = np.abs(states) ** 2
    rows, columns = linear_sum_assignment(-weights)
    assignment = dict(zip(rows.tolist(), columns.tolist()))
    indices, overlaps = {}, {}
    for label in labels:
        bare = int(np.ravel_multi_index(tuple(label), tuple(dims)))
        dressed = assignment[bare]
        indices[tuple(label)] = dressed
        overlaps[tuple(label)] = float(weights[bare, dressed])
    return indices, overlaps


def flux_line_loss(E_J1: float, E_J2: float, M_sigma: float, phi_zpf: float, omega: float,
                   impedance: float = 50.0,
                   spectrum: Optional[Callable[[float], float]] = None) -> float:
    """
    Buffer loss through the common-mode flux line.

    kappa = (phi_zpf^2 / hbar^2) ((2 pi / Phi_0)(E_J1 + E_J2) M)^2 S_II(omega)
    with the zero-temperature S_II(omega) = 2 hbar omega / Z by default.

    Args:
        E_J1: Side-junction energy (GHz, h = 1)
        E_J2: Side-junction energy (GHz, h = 1)
        M_sigma: Mutual inductance to the flux line (H)
        phi_zpf: Buffer phase zero-point fluctuation
        omega: Buffer frequency (GHz, ordinary)
        impedance: Flux-line impedance (Ohm)
        spectrum: Current noise spectral density S_II(omega) in A^2/Hz, angular omega in rad/s

    Returns:
        Loss rate in 1/s
    """
    validate_positive(phi_zpf, 'phi_zpf')
    validate_positive(omega, 'omega')
    validate_positive(impedance, 'impedance')
    angular = 2 * math.pi * omega * 1e9
    joules = (E_J1 + E_J2) * 1e9 * si.h
    noise = spectrum(angular) if spectrum is not None else 2 * si.hbar * angular / impedance
    coupling = (2 * math.pi / FLUX_QUANTUM) * joules * M_sigma
    return float(phi_zpf ** 2 / si.hbar ** 2 * coupling ** 2 * noise)


# Convenience functions
def ats_quantize(params: ATSParams, oscillator_dim: int = DEFAULT_OSCILLATOR_DIM
                 ) -> Tuple[float, float, np.ndarray]:
    """(omega_b, K_b, eigenenergies) of the numerically quantized buffer."""
    spectrum = ATSQuantizer(oscillator_dim).quantize(params)
    return spectrum.omega_b, spectrum.K_b, spectrum.energies


def ats_flux_sweep(params: ATSParams, phi_delta_list: Sequence[float],
                   oscillator_dim: int = DEFAULT_OSCILLATOR_DIM) -> Dict[str, np.ndarray]:
    """omega_b and K_b versus phi_delta."""
    return ATSQuantizer(oscillator_dim).flux_sweep(params, phi_delta_list)


def storage_buffer_nonlinearities(params: ATSParams, g_sb: float, omega_s0: float,
                                  storage_dim: int = 8, buffer_levels: int = 10,
                                  oscillator_dim: int = DEFAULT_OSCILLATOR_DIM
                                  ) -> Tuple[float, float]:
    """(K_s, chi_sb) in GHz for a linear storage coupled to the buffer."""
    result = ATSQuantizer(oscillator_dim).storage_buffer_nonlinearities(
        params, g_sb, omega_s0, storage_dim, buffer_levels
    )
    return result.K_s, result.chi_sb


# Export all circuit classes and functions
__all__ = [
    'FLUX_QUANTUM',
    'ATSParams',
    'BufferSpectrum',
    'StorageBufferNonlinearities',
    'ATSQuantizer',
    'ats_effective_potential',
    'ats_full_potential',
    'ats_minimized_potential',
    'balance_junction_energy',
    'buffer_perturbative',
    'oscillator_operators',
    'label_dressed_states',
    'flux_line_loss',
    'ats_quantize',
    'ats_flux_sweep',
    'storage_buffer_nonlinearities',
]
