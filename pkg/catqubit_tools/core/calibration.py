"""
Emulated calibration experiments for catqubit-tools.

Every emulator injects a known parameter, synthesizes the signal the
calibration protocol would measure (optionally with binomial shot noise),
fits it the way the protocol does and reports the recovered value.

Units: times in us, rates and angular frequencies in rad/us, Ramsey
frequencies in MHz.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm
from scipy.optimize import least_squares
from scipy.stats import linregress

from ..utils.constants import CALIBRATION_DEFAULTS, CALIBRATION_NAMES, ERROR_MESSAGES, TWO_PI
from ..utils.validation import (
    FitError,
    ValidationError,
    validate_choice,
    validate_finite_array,
    validate_guard,
    validate_positive,
    validate_time_grid,
)
from .catmodel import (
    CatParams,
    ModelKind,
    build_effective,
    default_storage_dim,
    kappa2_from_g2,
    prepare_fock_manifold,
)
from .dynamics import MasterEquationSolver, SteadySubspace, population_generator
from .fock import (
    FockSpace,
    coherent_state,
    expect,
    number_operator,
    pad,
    parity_operator,
    phase_space_grid,
    wigner,
)
from .metrology import ExponentialFitter, ShotModel, fit_damped_cosine, sample_shots

logger = logging.getLogger(__name__)

# Disjoint random streams per calibration; point index is added on top.
_STREAM_BASE = {name: 100000 * (index + 1) for index, name in enumerate(CALIBRATION_NAMES)}

_DEVICE_KAPPA_B = TWO_PI * 10.7
_KERR_UNIT = TWO_PI * 1e-3


@dataclass
class CalibrationResult:
    """Injected and recovered value of one emulated calibration."""

    name: str
    injected: float
    recovered: float
    stderr: Optional[float] = None
    secondary: Dict[str, Any] = field(default_factory=dict)
    flagged: List[str] = field(default_factory=list)
    data: Dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def relative_error(self) -> float:
        if self.injected == 0:
            return abs(self.recovered)
        return abs(self.recovered - self.injected) / abs(self.injected)

    @property
    def identifiable(self) -> bool:
        return 'unidentifiable' not in self.flagged

    def to_report(self) -> Dict[str, Any]:
        return {
            'calibration': self.name,
            'injected': self.injected,
            'recovered': self.recovered,
            'stderr': self.stderr,
            'relative_error': self.relative_error,
            'secondary': dict(self.secondary),
            'flagged': list(self.flagged),
        }


def _coherent_overlaps(rho: np.ndarray, space: FockSpace, amplitudes: Sequence[complex]
                       ) -> np.ndarray:
    # <beta|rho|beta> for each beta
    values = []
    for beta in amplitudes:
        vector = coherent_state(space, beta).amplitudes
        values.append(float(np.real(np.vdot(vector, rho @ vector))))
    return np.array(values)


def _fit_ramsey_fringe(t: np.ndarray, y: np.ndarray, photons: float,
                       ramsey_frequency: float) -> float:
    """Frequency f of A exp(-n (2 - 2 cos(2 pi f t))) fitted to y."""

    def shape(frequency):
        return np.exp(-photons * (2.0 - 2.0 * np.cos(TWO_PI * frequency * t)))

    trials = np.linspace(0.5 * ramsey_frequency, 1.5 * ramsey_frequency, 401)
    costs = []
    for frequency in trials:
        g = shape(frequency)
        amplitude = float(g @ y) / float(g @ g)
        costs.append(float(np.sum((amplitude * g - y) ** 2)))
    frequency0 = trials[int(np.argmin(costs))]
    g0 = shape(frequency0)
    x0 = np.array([float(g0 @ y) / float(g0 @ g0), frequency0])
    result = least_squares(lambda x: x[0] * shape(x[1]) - y, x0, method='lm', x_scale='jac')
    if result.status <= 0:
        raise FitError(ERROR_MESSAGES['fit_failed'].format(message=result.message),
                       {'photons': photons})
    return float(result.x[1])


def _fit_fringe_phase(phases: np.ndarray, y: np.ndarray, alpha: float) -> float:
    """Phase offset of A exp(-alpha^2 (2 - 2 cos(phi - theta0))) + C."""

    def shape(theta0):
        return np.exp(-alpha ** 2 * (2.0 - 2.0 * np.cos(phases - theta0)))

    trials = np.linspace(-np.pi, np.pi, 721)[1:]
    best = None
    for theta0 in trials:
        design = np.column_stack([shape(theta0), np.ones_like(phases)])
        coefficients, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
        cost = float(np.sum((design @ coefficients - y) ** 2))
        if best is None or cost < best[0]:
            best = (cost, theta0, coefficients)
    _, theta0, (amplitude, offset) = best
    result = least_squares(lambda x: x[0] * shape(x[1]) + x[2] - y,
                           np.array([amplitude, theta0, offset]), method='lm')
    return float(np.angle(np.exp(1j * result.x[1])))


def _two_gaussians(x: np.ndarray, points: np.ndarray) -> np.ndarray:
    amp_1, amp_2, width, x0, y0, offset = x
    plus = (points.real - x0) ** 2 + (points.imag - y0) ** 2
    minus = (points.real + x0) ** 2 + (points.imag + y0) ** 2
    scale = 2.0 * width ** 2
    return amp_1 * np.exp(-plus / scale) + amp_2 * np.exp(-minus / scale) + offset


class CalibrationEmulator:
    """Synthesizes and fits the storage and ancilla calibration experiments."""

    def __init__(self, shot_model: Optional[ShotModel] = None,
                 solver: Optional[MasterEquationSolver] = None):
        """
        Initialize calibration emulator.

        Args:
            shot_model: Binomial readout model (noiseless data if None)
            solver: Master-equation solver; must store states
        """
        self.shot_model = shot_model
        self.solver = solver or MasterEquationSolver()
        if not self.solver.store_states:
            raise ValidationError("Calibration emulation needs a solver that stores states",
                                  'solver')
        self.fitter = ExponentialFitter()

    def _measure(self, probabilities: Sequence[float], name: str, index: int = 0) -> np.ndarray:
        probabilities = np.asarray(probabilities, dtype=float)
        if self.shot_model is None:
            return probabilities
        return sample_shots(probabilities, self.shot_model, _STREAM_BASE[name] + index)

    def _measure_expectation(self, values: Sequence[float], name: str, index: int = 0
                             ) -> np.ndarray:
        # +-1 observable read out as the probability of the +1 outcome
        values = np.asarray(values, dtype=float)
        return 2.0 * self._measure(0.5 * (1.0 + values), name, index) - 1.0

    def run(self, name: str, **kwargs) -> CalibrationResult:
        """Dispatch by calibration name."""
        validate_choice(name, CALIBRATION_NAMES, 'calibration')
        handlers: Dict[str, Callable[..., CalibrationResult]] = {
            'g2': self.g2_fit,
            'displacement': self.displacement_calibration,
            'buffer_amp': self.buffer_amp_calibration,
            'kerr': self.kerr_ramsey,
            'conditional_phase': self.conditional_phase,
            'off_position_chi': self.off_position_chi,
            'storage_coherence': self.storage_coherence,
        }
        return handlers[name](**kwargs)

    # g2 from vacuum population under pure two-photon dissipation

    def g2_fit(self, true_params: CatParams, t_grid: Optional[Sequence[float]] = None,
               initial_g2: float = TWO_PI * 0.5,
               storage_dim: int = CALIBRATION_DEFAULTS['g2_storage_dim'],
               beta_sq: float = CALIBRATION_DEFAULTS['g2_initial_beta_sq']) -> CalibrationResult:
        """
        Fit g2 to the vacuum population after releasing a large coherent state.

        The data is integrated with the master-equation solver; the fit
        re-simulates the same model through its closed population dynamics.

        Args:
            true_params: Injected rates (alpha_sq, chi_sb and K_s are ignored)
            t_grid: Sampling times (0 to 4 us by default)
            initial_g2: Starting guess for the fit
            storage_dim: Storage truncation
            beta_sq: Initial photon number

        Returns:
            CalibrationResult for g2 with kappa_2 in secondary

        Raises:
            TruncationError: If beta_sq > storage_dim/4
            FitError: If the fit does not converge
        """
        times = validate_time_grid(np.linspace(0.0, 4.0, 41) if t_grid is None else t_grid)
        validate_positive(initial_g2, 'initial_g2')
        validate_guard(math.sqrt(beta_sq), storage_dim)
        base = true_params.replace(alpha_sq=0.0, chi_sb=0.0, K_s=0.0, aggressor=None)
        space = FockSpace(storage_dim, 'storage')
        initial = coherent_state(space, math.sqrt(beta_sq))
        vacuum_projector = np.zeros((storage_dim, storage_dim))
        vacuum_projector[0, 0] = 1.0

        generator = build_effective(base, storage_dim, ModelKind.EFFECTIVE_EXACT)
        evolution = self.solver.evolve(generator, initial, times)
        clean = np.array([float(np.real(evolution.states[index][0, 0]))
                          for index in range(times.size)])
        measured = self._measure(clean, 'g2')
        populations0 = np.abs(initial.amplitudes) ** 2

        def simulate(g2: float) -> np.ndarray:
            rates = population_generator(
                build_effective(base.replace(g2=g2), storage_dim, ModelKind.EFFECTIVE_EXACT)
            )
            trace = np.empty(times.size)
            populations = populations0.copy()
            previous = times[0]
            for index, time in enumerate(times):
                if time > previous:
                    populations = expm(rates * (time - previous)) @ populations
                    previous = time
                trace[index] = populations[0]
            return trace

        def residual(x: np.ndarray) -> np.ndarray:
            return simulate(x[0] * initial_g2) - measured

        candidates = np.concatenate([[0.0], np.logspace(-2, 1, 31)])
        costs = [float(np.sum(residual(np.array([c])) ** 2)) for c in candidates]
        x0 = max(float(candidates[int(np.argmin(costs))]), 1e-6)
        try:
            result = least_squares(residual, np.array([x0]), bounds=(0.0, np.inf),
                                   method='trf', diff_step=1e-4)
        except Exception as e:
            raise FitError(ERROR_MESSAGES['fit_failed'].format(message=e), {'x0': x0}) from e
        if result.status <= 0:
            raise FitError(ERROR_MESSAGES['fit_failed'].format(message=result.message),
                           {'x': result.x.tolist()})

        g2 = float(result.x[0] * initial_g2)
        kappa2 = kappa2_from_g2(g2, base.kappa_b)
        stderr = None
        dof = times.size - 1
        jtj = result.jac.T @ result.jac
        if dof > 0 and jtj[0, 0] > 0:
            stderr = float(math.sqrt(2.0 * result.cost / dof / jtj[0, 0]) * initial_g2)
        flagged = []
        if kappa2 * (times[-1] - times[0]) < 0.1:
            flagged.append('unidentifiable')
            logger.warning("g2 fit: kappa_2 t_max = %.3g, g2 is not identifiable from this data",
                           kappa2 * (times[-1] - times[0]))
        logger.debug("g2 fit: %d evaluations, g2 = %.6g", result.nfev, g2)
        return CalibrationResult(
            name='g2',
            injected=float(true_params.g2),
            recovered=g2,
            stderr=stderr,
            secondary={'kappa_2': kappa2, 'kappa_2_injected': base.kappa2},
            flagged=flagged,
            data={'t': times, 'p0': measured},
        )

    # Displacement scale from displaced parity

    def displacement_calibration(self, scale_true: float,
                                 amplitudes: Optional[Sequence[float]] = None,
                                 storage_dim: int = CALIBRATION_DEFAULTS['displacement_storage_dim']
                                 ) -> CalibrationResult:
        """
        Recover the hidden scale s in alpha = s * commanded amplitude.

        Args:
            scale_true: Injected scale
            amplitudes: Commanded amplitudes (0 to 1.5 by default)
            storage_dim: Storage truncation

        Returns:
            CalibrationResult for the scale
        """
        commanded = validate_finite_array(
            np.linspace(0.0, 1.5, 16) if amplitudes is None else amplitudes, 'amplitudes', 2
        )
        validate_positive(scale_true, 'scale_true')
        space = FockSpace(storage_dim, 'storage')
        parity = parity_operator(space)
        clean = np.array([float(np.real(expect(parity, coherent_state(space, scale_true * x))))
                          for x in commanded])
        measured = self._measure_expectation(clean, 'displacement')

        usable = measured > 1e-3 * np.max(measured)
        if np.count_nonzero(usable) >= 2 and np.ptp(commanded[usable]) > 0:
            slope, intercept = np.polyfit(commanded[usable] ** 2, np.log(measured[usable]), 1)
            x0 = np.array([math.exp(intercept), math.sqrt(max(-0.5 * slope, 1e-6))])
        else:
            x0 = np.array([1.0, 1.0])

        def residual(x):
            return x[0] * np.exp(-2.0 * (x[1] * commanded) ** 2) - measured

        result = least_squares(residual, x0, method='lm', x_scale='jac')
        if result.status <= 0:
            raise FitError(ERROR_MESSAGES['fit_failed'].format(message=result.message),
                           {'x0': x0.tolist()})
        return CalibrationResult(
            name='displacement',
            injected=float(scale_true),
            recovered=abs(float(result.x[1])),
            secondary={'contrast': float(result.x[0])},
            data={'amplitude': commanded, 'parity': measured},
        )

    # Buffer drive amplitude to alpha^2 from steady-state Wigner functions

    @staticmethod
    def lobe_radius_sq(points: np.ndarray, values: np.ndarray) -> Tuple[float, bool]:
        """
        Fit two opposed Gaussians to Wigner samples.

        Lobes are seeded at the sample maximizing |p| |W(p)|, which excludes the
        central interference fringe.

        Returns:
            (X0^2 + Y0^2, converged)
        """
        points, values = np.ravel(points), np.ravel(values)
        index = int(np.argmax(np.abs(points) * np.abs(values)))
        peak, height = points[index], abs(float(values[index]))
        x0 = np.array([height, height, 0.5, peak.real, peak.imag, 0.0])
        try:
            result = least_squares(lambda x: _two_gaussians(x, points) - values, x0,
                                   method='lm', x_scale='jac')
        except Exception as e:
            logger.debug("Two-Gaussian fit failed: %s", e)
            return 0.0, False
        return float(result.x[3] ** 2 + result.x[4] ** 2), bool(result.status > 0)

    def steady_wigner(self, params: CatParams, grid: np.ndarray, wigner_dim: int = 64
                      ) -> np.ndarray:
        """Wigner function of the even-sector steady state of the effective model."""
        dim = default_storage_dim(params.alpha_sq)
        generator = build_effective(params, dim, ModelKind.EFFECTIVE_EXACT)
        parity = parity_operator(generator.space)
        state = self.solver.steady_state(generator, parity)
        if isinstance(state, SteadySubspace):
            # Degenerate steady space: relax from vacuum instead.
            if params.kappa2 <= 0:
                raise ValidationError("Buffer drive calibration needs g2 > 0", 'g2')
            relax = 20.0 / params.kappa2
            state = self.solver.evolve(generator, coherent_state(generator.space, 0.0),
                                       [0.0, relax]).final_state
        return wigner(pad(state, max(wigner_dim, dim)), grid)

    def buffer_amp_calibration(self, params: CatParams, drive_amplitudes: Sequence[float],
                               alpha_sq_per_amplitude: float, grid_step: float = 0.2,
                               wigner_dim: int = 64) -> CalibrationResult:
        """
        Recover the linear map from buffer drive amplitude to alpha^2.

        Two diametrically opposed Gaussians are fitted to each steady-state
        Wigner function; X0^2 + Y0^2 is regressed on the drive amplitude.

        Args:
            params: Stabilization rates (alpha_sq is replaced per point)
            drive_amplitudes: Commanded buffer drive amplitudes
            alpha_sq_per_amplitude: Injected slope of alpha^2 per unit amplitude
            grid_step: Phase-space grid spacing
            wigner_dim: Truncation used for Wigner evaluation

        Returns:
            CalibrationResult for the slope, intercept in secondary

        Raises:
            FitError: If fewer than two amplitudes survive the exclusion
        """
        amplitudes = validate_finite_array(drive_amplitudes, 'drive_amplitudes', 2)
        validate_positive(alpha_sq_per_amplitude, 'alpha_sq_per_amplitude')
        x_axis = np.arange(-3.2, 3.2 + 1e-9, grid_step)
        y_axis = np.arange(-2.0, 2.0 + 1e-9, grid_step)
        grid = phase_space_grid(x_axis, y_axis)
        points = grid.ravel()
        floor = CALIBRATION_DEFAULTS['buffer_amp_min_alpha_sq']

        kept_amplitudes, radii_sq, flagged = [], [], []
        for index, amplitude in enumerate(amplitudes):
            alpha_sq = alpha_sq_per_amplitude * amplitude
            values = self.steady_wigner(params.replace(alpha_sq=alpha_sq), grid, wigner_dim)
            values = values.ravel()
            if self.shot_model is not None:
                values = self._measure_expectation(0.5 * np.pi * values, 'buffer_amp',
                                                   index * points.size) * 2.0 / np.pi
            radius_sq, converged = self.lobe_radius_sq(points, values)
            if not converged or radius_sq < floor:
                flagged.append(f'amplitude {amplitude:g} excluded')
                logger.warning("Buffer drive amplitude %g excluded (fitted alpha^2 %.3g)",
                               amplitude, radius_sq)
                continue
            kept_amplitudes.append(amplitude)
            radii_sq.append(radius_sq)

        if len(kept_amplitudes) < 2:
            raise FitError(ERROR_MESSAGES['fit_failed'].format(
                message='fewer than two amplitudes with resolvable lobes'),
                {'kept': kept_amplitudes})
        regression = linregress(kept_amplitudes, radii_sq)
        return CalibrationResult(
            name='buffer_amp',
            injected=float(alpha_sq_per_amplitude),
            recovered=float(regression.slope),
            stderr=float(regression.stderr),
            secondary={'intercept': float(regression.intercept)},
            flagged=flagged,
            data={'amplitude': np.array(kept_amplitudes), 'alpha_sq': np.array(radii_sq)},
        )

    # Self-Kerr from amplitude-dependent Ramsey frequency

    def _kerr_frequencies(self, K_s: float, amplitudes: np.ndarray, delays: np.ndarray,
                          kappa_1: float, ramsey_frequency: float, measure: bool) -> np.ndarray:
        frequencies = []
        for index, amplitude in enumerate(amplitudes):
            photons = float(amplitude) ** 2
            dim = default_storage_dim(photons)
            params = CatParams(g2=0.0, alpha_sq=0.0, kappa_b=_DEVICE_KAPPA_B,
                               kappa_1=kappa_1, K_s=K_s)
            generator = build_effective(params, dim, ModelKind.EFFECTIVE_EXACT)
            space = FockSpace(dim, 'storage')
            evolution = self.solver.evolve(generator, coherent_state(space, amplitude), delays)
            signal = np.array([
                _coherent_overlaps(evolution.states[k], space,
                                   [amplitude * np.exp(1j * TWO_PI * ramsey_frequency * t)])[0]
                for k, t in enumerate(delays)
            ])
            if measure:
                signal = self._measure(signal, 'kerr', index * delays.size)
            frequencies.append(_fit_ramsey_fringe(delays, signal, photons, ramsey_frequency))
        return np.array(frequencies)

    def kerr_ramsey(self, K_s_true: float, amplitudes: Optional[Sequence[float]] = None,
                    delays: Optional[Sequence[float]] = None, kappa_1: float = 0.0,
                    ramsey_frequency: float = 0.05) -> CalibrationResult:
        """
        Recover K_s from the Ramsey frequency of displaced storage states.

        Each amplitude gives a fringe A exp(-|alpha|^2 (2 - 2 cos(2 pi f t)));
        the offsets of f from the low-amplitude reference are then matched by
        re-simulating the free evolution for trial K_s.

        Args:
            K_s_true: Injected self-Kerr (rad/us)
            amplitudes: Displacement amplitudes |alpha|
            delays: Free-evolution times (0 to 40 us by default)
            kappa_1: Single-photon loss during the delay
            ramsey_frequency: Frame detuning of the return displacement (MHz)

        Returns:
            CalibrationResult for K_s
        """
        amplitudes = validate_finite_array(
            np.linspace(0.25, 2.0, 8) if amplitudes is None else amplitudes, 'amplitudes', 2
        )
        delays = validate_time_grid(np.linspace(0.0, 40.0, 81) if delays is None else delays)
        validate_positive(ramsey_frequency, 'ramsey_frequency')
        threshold = CALIBRATION_DEFAULTS['kerr_min_amplitude']
        flagged = [f'amplitude {a:g} excluded' for a in amplitudes if abs(a) < threshold]
        amplitudes = amplitudes[np.abs(amplitudes) >= threshold]
        reference = CALIBRATION_DEFAULTS['kerr_reference_points']
        if amplitudes.size < 2:
            raise ValidationError("Kerr calibration needs two amplitudes above threshold",
                                  'amplitudes')
        reference = min(reference, amplitudes.size)

        def offsets(frequencies: np.ndarray) -> np.ndarray:
            return frequencies - np.mean(frequencies[:reference])

        measured = self._kerr_frequencies(K_s_true, amplitudes, delays, kappa_1,
                                          ramsey_frequency, measure=True)
        data_offsets = offsets(measured)
        photons = amplitudes ** 2
        slope = np.polyfit(photons, data_offsets, 1)[0] if np.ptp(photons) > 0 else 0.0
        k0 = TWO_PI * slope / _KERR_UNIT

        def residual(x):
            model = self._kerr_frequencies(x[0] * _KERR_UNIT, amplitudes, delays, kappa_1,
                                           ramsey_frequency, measure=False)
            return offsets(model) - data_offsets

        try:
            result = least_squares(residual, np.array([k0]), method='trf', diff_step=1e-3)
        except Exception as e:
            raise FitError(ERROR_MESSAGES['fit_failed'].format(message=e), {'k0': k0}) from e
        return CalibrationResult(
            name='kerr',
            injected=float(K_s_true),
            recovered=float(result.x[0] * _KERR_UNIT),
            secondary={'initial_estimate': float(k0 * _KERR_UNIT)},
            flagged=flagged,
            data={'alpha_sq': photons, 'frequency': measured, 'offset': data_offsets},
        )

    # Conditional phase from ancilla-state dependent fringes

    def conditional_phase(self, chi_sa_true: float,
                          pulse_lengths: Optional[Sequence[float]] = None,
                          phases: Optional[Sequence[float]] = None,
                          alpha: float = CALIBRATION_DEFAULTS['conditional_phase_alpha'],
                          contrast: float = 0.9, offset: float = 0.05,
                          reference_phase: float = 0.0) -> CalibrationResult:
        """
        Recover chi_sa from the storage phase acquired with the ancilla in |e>.

        Args:
            chi_sa_true: Injected dispersive shift (rad/us)
            pulse_lengths: Interaction times (0 to 1 us by default)
            phases: Return-displacement phases (k pi / 8 by default)
            alpha: Displacement amplitude
            contrast: Fringe amplitude
            offset: Fringe offset
            reference_phase: Phase offset of the |g> fringe

        Returns:
            CalibrationResult for chi_sa, pi-phase pulse length in secondary
        """
        lengths = validate_time_grid(np.linspace(0.0, 1.0, 11) if pulse_lengths is None
                                     else pulse_lengths, 'pulse_lengths')
        count = CALIBRATION_DEFAULTS['conditional_phase_count']
        phases = validate_finite_array(np.arange(count) * np.pi / count if phases is None
                                       else phases, 'phases', 3)
        if contrast + offset > 1.0 or offset < 0 or contrast <= 0:
            raise ValidationError("Fringe must stay inside [0, 1]", 'contrast')

        def fringe(theta0):
            return offset + contrast * np.exp(-alpha ** 2 * (2.0 - 2.0 * np.cos(phases - theta0)))

        differences = []
        for index, length in enumerate(lengths):
            fitted = []
            for branch, theta0 in enumerate((reference_phase,
                                             reference_phase + chi_sa_true * length)):
                stream = (2 * index + branch) * phases.size
                measured = self._measure(fringe(theta0), 'conditional_phase', stream)
                fitted.append(_fit_fringe_phase(phases, measured, alpha))
            differences.append(np.angle(np.exp(1j * (fitted[1] - fitted[0]))))
        unwrapped = np.unwrap(np.array(differences))
        if lengths.size >= 2:
            chi, intercept = np.polyfit(lengths, unwrapped, 1)
        else:
            chi, intercept = unwrapped[0] / lengths[0], 0.0
        chi, intercept = float(chi), float(intercept)
        if chi == 0:
            pi_length = math.inf
        else:
            pi_length = (math.copysign(math.pi, chi) - intercept) / chi
        return CalibrationResult(
            name='conditional_phase',
            injected=float(chi_sa_true),
            recovered=chi,
            secondary={'pi_pulse_length': pi_length, 'intercept': intercept},
            data={'pulse_length': lengths, 'phase_difference': unwrapped},
        )

    # Off-position chi_sa from photon-number dependent ancilla Ramsey

    def off_position_chi(self, chi_sa_true: float,
                         alpha_sq_list: Optional[Sequence[float]] = None,
                         delays: Optional[Sequence[float]] = None,
                         ramsey_frequency: float = 0.1, ancilla_t2: float = math.inf,
                         storage_dim: int = CALIBRATION_DEFAULTS['off_position_storage_dim']
                         ) -> CalibrationResult:
        """
        Recover a small chi_sa from the shift of the ancilla Ramsey frequency.

        Each photon-number component n of the coherent storage state shifts
        the fringe by chi_sa n; the fitted frequency is regressed on the
        mean photon number.

        Args:
            chi_sa_true: Injected dispersive shift (rad/us)
            alpha_sq_list: Storage photon numbers (0 to 20 by default)
            delays: Ramsey delays (0 to 20 us by default)
            ramsey_frequency: Ancilla Ramsey detuning (MHz)
            ancilla_t2: Ancilla dephasing time (us)
            storage_dim: Storage truncation

        Returns:
            CalibrationResult for chi_sa
        """
        photons = validate_finite_array(np.arange(0.0, 21.0, 2.0) if alpha_sq_list is None
                                        else alpha_sq_list, 'alpha_sq_list', 2)
        delays = validate_time_grid(np.linspace(0.0, 20.0, 81) if delays is None else delays)
        validate_positive(ramsey_frequency, 'ramsey_frequency')
        if ancilla_t2 != math.inf:
            validate_positive(ancilla_t2, 'ancilla_t2')
        space = FockSpace(storage_dim, 'storage')
        number = number_operator(space)
        levels = np.arange(storage_dim)
        envelope = np.exp(-delays / ancilla_t2)

        mean_photons, frequencies = [], []
        for index, alpha_sq in enumerate(photons):
            state = coherent_state(space, math.sqrt(alpha_sq))
            distribution = np.abs(state.amplitudes) ** 2
            mean_photons.append(float(np.real(expect(number, state))))
            phase = (TWO_PI * ramsey_frequency + chi_sa_true * levels[None, :]) * delays[:, None]
            clean = 0.5 * (1.0 + envelope * (np.cos(phase) @ distribution))
            measured = self._measure(clean, 'off_position_chi', index * delays.size)
            fit = fit_damped_cosine(delays, measured,
                                    (0.5 * ramsey_frequency, 1.5 * ramsey_frequency))
            frequencies.append(fit.frequency)

        regression = linregress(mean_photons, frequencies)
        return CalibrationResult(
            name='off_position_chi',
            injected=float(chi_sa_true),
            recovered=float(TWO_PI * regression.slope),
            stderr=float(TWO_PI * regression.stderr),
            secondary={'ramsey_frequency_fit': float(regression.intercept)},
            data={'mean_photons': np.array(mean_photons), 'frequency': np.array(frequencies)},
        )

    # Storage T1 and T2 in the |0>/|1> manifold

    def storage_coherence(self, params: CatParams, delays: Optional[Sequence[float]] = None,
                          ramsey_frequency: float = 0.05, with_dissipation: bool = False,
                          storage_dim: Optional[int] = None) -> CalibrationResult:
        """
        Storage T1 and T2 after dissipative preparation of the |0>/|1> manifold.

        T1 comes from an offset exponential fit of the parity, T2 from the
        damped fringe of the antisymmetrized return-displacement population.

        Args:
            params: Storage rates (kappa_1 > 0 required)
            delays: Free delays (0 to 200 us by default)
            ramsey_frequency: Frame detuning of the return displacement (MHz)
            with_dissipation: Keep pure two-photon dissipation on during the delay
            storage_dim: Storage truncation

        Returns:
            CalibrationResult for T1 with the T2 values in secondary
        """
        validate_positive(params.kappa_1, 'kappa_1')
        validate_positive(ramsey_frequency, 'ramsey_frequency')
        delays = validate_time_grid(np.linspace(0.0, 200.0, 101) if delays is None else delays)
        beta_sq = CALIBRATION_DEFAULTS['coherence_prep_beta_sq']
        dim = storage_dim or default_storage_dim(beta_sq)
        prepared = prepare_fock_manifold(params, beta_sq,
                                         CALIBRATION_DEFAULTS['coherence_prep_duration'],
                                         dim, self.solver)
        free = params.replace(alpha_sq=0.0, aggressor=None)
        if not with_dissipation:
            free = free.replace(g2=0.0)
        generator = build_effective(free, dim, ModelKind.EFFECTIVE_EXACT)
        evolution = self.solver.evolve(generator, prepared, delays,
                                       {'parity': parity_operator(generator.space)})

        parity = self._measure_expectation(evolution.expectations['parity'].real,
                                           'storage_coherence')
        t1_fit = self.fitter.fit(delays - delays[0], parity, with_offset=True)

        space = FockSpace(dim, 'storage')
        size = CALIBRATION_DEFAULTS['coherence_displacement']
        plus, minus = [], []
        for index, t in enumerate(delays):
            gamma = size * np.exp(1j * TWO_PI * ramsey_frequency * t)
            overlaps = _coherent_overlaps(evolution.states[index], space, [gamma, -gamma])
            plus.append(overlaps[0])
            minus.append(overlaps[1])
        offset = delays.size
        signal = 0.5 * (self._measure(plus, 'storage_coherence', offset)
                        - self._measure(minus, 'storage_coherence', 2 * offset))
        t2_fit = fit_damped_cosine(delays - delays[0], signal,
                                   (0.5 * ramsey_frequency, 1.5 * ramsey_frequency))

        expected_t2 = 2.0 / (params.kappa_1 + params.kappa_phi)
        return CalibrationResult(
            name='storage_coherence',
            injected=1.0 / params.kappa_1,
            recovered=t1_fit.time_constant,
            stderr=float(t1_fit.stderr[1]),
            secondary={
                't2_injected': expected_t2,
                't2_recovered': t2_fit.decay_time,
                't2_relative_error': abs(t2_fit.decay_time - expected_t2) / expected_t2,
            },
            data={'t': delays, 'parity': parity, 'ramsey': signal},
        )


# Convenience functions
def emulate_g2_fit(true_params: CatParams, shot_model: Optional[ShotModel] = None,
                   **kwargs) -> CalibrationResult:
    """Injected-versus-fitted g2 from vacuum-population data."""
    return CalibrationEmulator(shot_model).g2_fit(true_params, **kwargs)


def emulate_displacement_calibration(scale_true: float, shot_model: Optional[ShotModel] = None,
                                     **kwargs) -> CalibrationResult:
    """Hidden displacement scale from displaced-parity data."""
    return CalibrationEmulator(shot_model).displacement_calibration(scale_true, **kwargs)


def emulate_buffer_amp_calibration(params: CatParams, drive_amplitudes: Sequence[float],
                                   alpha_sq_per_amplitude: float,
                                   shot_model: Optional[ShotModel] = None,
                                   **kwargs) -> CalibrationResult:
    """Linear drive-amplitude to alpha^2 map from steady-state Wigner fits."""
    return CalibrationEmulator(shot_model).buffer_amp_calibration(
        params, drive_amplitudes, alpha_sq_per_amplitude, **kwargs
    )


def emulate_kerr_ramsey(K_s_true: float, amplitudes: Optional[Sequence[float]] = None,
                        delays: Optional[Sequence[float]] = None,
                        shot_model: Optional[ShotModel] = None, **kwargs) -> CalibrationResult:
    """Self-Kerr from amplitude-dependent Ramsey frequencies."""
    return CalibrationEmulator(shot_model).kerr_ramsey(K_s_true, amplitudes, delays, **kwargs)


def emulate_conditional_phase(chi_sa_true: float, pulse_lengths: Optional[Sequence[float]] = None,
                              phases: Optional[Sequence[float]] = None,
                              shot_model: Optional[ShotModel] = None,
                              **kwargs) -> CalibrationResult:
    """chi_sa and pi-phase pulse length from conditional-phase fringes."""
    return CalibrationEmulator(shot_model).conditional_phase(chi_sa_true, pulse_lengths, phases,
                                                             **kwargs)


def emulate_off_position_chi(chi_sa_true: float, alpha_sq_list: Optional[Sequence[float]] = None,
                             shot_model: Optional[ShotModel] = None,
                             **kwargs) -> CalibrationResult:
    """Small chi_sa from the photon-number dependent ancilla Ramsey shift."""
    return CalibrationEmulator(shot_model).off_position_chi(chi_sa_true, alpha_sq_list, **kwargs)


def emulate_storage_coherence(params: CatParams, delays: Optional[Sequence[float]] = None,
                              shot_model: Optional[ShotModel] = None,
                              **kwargs) -> CalibrationResult:
    """Storage T1 and T2 in the |0>/|1> manifold."""
    return CalibrationEmulator(shot_model).storage_coherence(params, delays, **kwargs)


# Export all calibration classes and functions
__all__ = [
    'CalibrationResult',
    'CalibrationEmulator',
    'emulate_g2_fit',
    'emulate_displacement_calibration',
    'emulate_buffer_amp_calibration',
    'emulate_kerr_ramsey',
    'emulate_conditional_phase',
    'emulate_off_position_chi',
    'emulate_storage_coherence',
]
