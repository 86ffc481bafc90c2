"""
Fitting and error-rate metrology for catqubit-tools.

This module provides exponential decay fits, Pauli-channel error
probabilities, bit-flip scaling fits, phase-flip linear fits and
binomial shot sampling.
"""

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import least_squares

from ..utils.constants import (
    ERROR_MESSAGES,
    FIT_SETTINGS,
    PROBABILITY_CLIP_ERROR,
    PROBABILITY_CLIP_SILENT,
)
from ..utils.validation import (
    FitError,
    ValidationError,
    validate_choice,
    validate_finite_array,
    validate_rate,
)

logger = logging.getLogger(__name__)


@dataclass
class DecayFit:
    """Result of fitting A exp(-t/T) (+ B)."""

    amplitude: float
    time_constant: float
    offset: Optional[float]
    covariance: np.ndarray
    residual_norm: float
    iterations: int = 0
    weighted: bool = False

    @property
    def with_offset(self) -> bool:
        return self.offset is not None

    @property
    def stderr(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))

    def evaluate(self, t: Sequence[float]) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return exp_decay_model(t, self.amplitude, self.time_constant, self.offset or 0.0)

    def to_report(self, model: Optional[str] = None) -> Dict[str, Any]:
        """Structured parameter report (value, stderr) for result files."""
        names = ['amplitude', 'time_constant'] + (['offset'] if self.with_offset else [])
        values = [self.amplitude, self.time_constant] + ([self.offset] if self.with_offset else [])
        return {
            'model': model or ('exp_offset' if self.with_offset else 'exp'),
            'parameters': [
                {'name': name, 'value': value, 'stderr': err}
                for name, value, err in zip(names, values, self.stderr)
            ],
            'residual_norm': self.residual_norm,
            'iterations': self.iterations,
            'weighted': self.weighted,
        }


@dataclass
class ScalingFit:
    """Log-space fit of flip time against photon number."""

    prefactor: float
    exponent: float
    model: str
    covariance: np.ndarray
    residual_norm: float

    @property
    def per_photon_factor(self) -> float:
        return math.exp(self.exponent)

    def predict(self, alpha_sq: Sequence[float]) -> np.ndarray:
        alpha_sq = np.asarray(alpha_sq, dtype=float)
        times = self.prefactor * np.exp(self.exponent * alpha_sq)
        if self.model == 'exp_over_n':
            times = times / alpha_sq
        return times


@dataclass
class PhaseFlipFit:
    """Linear phase-flip rate gamma_Z = kappa_1,eff * alpha^2 (+ c)."""

    slope_origin: float
    slope_free: float
    intercept_free: float

    @property
    def t1_eff_origin(self) -> float:
        return 1.0 / self.slope_origin if self.slope_origin > 0 else math.inf

    @property
    def t1_eff_free(self) -> float:
        return 1.0 / self.slope_free if self.slope_free > 0 else math.inf


@dataclass(frozen=True)
class ShotModel:
    """Binomial readout with a fixed number of shots and a reproducible seed."""

    n_shots: int
    seed: int = 0

    def __post_init__(self):
        if int(self.n_shots) < 1:
            raise ValidationError(f"n_shots must be >= 1, got {self.n_shots}", 'n_shots')
        if int(self.seed) < 0 or int(self.seed) >= 2 ** 64:
            raise ValidationError("seed must be a non-negative 64-bit integer", 'seed')

    def rng(self, stream: int = 0) -> np.random.Generator:
        """Independent generator per stream; same (seed, stream) gives the same draws."""
        return np.random.default_rng(np.random.SeedSequence(int(self.seed),
                                                            spawn_key=(int(stream),)))

    def sample(self, probabilities: Sequence[float], stream: int = 0) -> np.ndarray:
        return sample_shots(probabilities, self, stream)


def exp_decay_model(t: np.ndarray, amplitude: float, time_constant: float,
                    offset: float = 0.0) -> np.ndarray:
    return amplitude * np.exp(-np.asarray(t, dtype=float) / time_constant) + offset


def exp_decay_jacobian(t: np.ndarray, amplitude: float, time_constant: float,
                       with_offset: bool = False) -> np.ndarray:
    """
    Analytic Jacobian of A exp(-t/T) (+ B) with respect to (A, T[, B]).

    Args:
        t: Sample times
        amplitude: A
        time_constant: T
        with_offset: Include the offset column

    Returns:
        Array of shape (len(t), 2 or 3)
    """
    t = np.asarray(t, dtype=float)
    decay = np.exp(-t / time_constant)
    columns = [decay, amplitude * t * decay / time_constant ** 2]
    if with_offset:
        columns.append(np.ones_like(t))
    return np.column_stack(columns)


class ExponentialFitter:
    """Levenberg-Marquardt (damped Gauss-Newton) exponential decay fitter."""

    def __init__(self, max_iterations: int = FIT_SETTINGS['max_iterations'],
                 step_tolerance: float = FIT_SETTINGS['step_tolerance']):
        """
        Initialize exponential fitter.

        Args:
            max_iterations: Iteration cap
            step_tolerance: Relative step size at which the fit is converged
        """
        self.max_iterations = max_iterations
        self.step_tolerance = step_tolerance

    def fit(self, t: Sequence[float], y: Sequence[float], with_offset: bool = False,
            sigma: Optional[Sequence[float]] = None) -> DecayFit:
        """
        Fit A exp(-t/T) (+ B).

        Args:
            t: Sample times
            y: Samples
            with_offset: Fit a constant offset B
            sigma: Optional per-point standard deviations (weighted fit)

        Returns:
            DecayFit

        Raises:
            ValidationError: On fewer than 4 points or non-finite data
            FitError: If the fit does not converge or T <= 0
        """
        t = validate_finite_array(t, 't', FIT_SETTINGS['min_points'])
        y = validate_finite_array(y, 'y', FIT_SETTINGS['min_points'])
        if t.size != y.size:
            raise ValidationError("t and y must have equal length", 'y')
        weights = np.ones_like(y)
        if sigma is not None:
            sigma = validate_finite_array(sigma, 'sigma', y.size)
            if np.any(sigma <= 0):
                raise ValidationError("sigma must be positive", 'sigma')
            weights = 1.0 / sigma

        x0 = self._initial_guess(t, y, with_offset)

        def residuals(x):
            offset = x[2] if with_offset else 0.0
            return weights * (exp_decay_model(t, x[0], x[1], offset) - y)

        def jacobian(x):
            return weights[:, None] * exp_decay_jacobian(t, x[0], x[1], with_offset)

        try:
            result = least_squares(
                residuals, x0, jac=jacobian, method='lm', x_scale='jac',
                xtol=self.step_tolerance, ftol=FIT_SETTINGS['cost_tolerance'],
                gtol=FIT_SETTINGS['gradient_tolerance'],
                max_nfev=self.max_iterations * (x0.size + 1),
            )
        except Exception as e:
            raise FitError(ERROR_MESSAGES['fit_failed'].format(message=e),
                           {'x0': x0.tolist()}) from e

        diagnostic = {
            'status': int(result.status),
            'message': result.message,
            'nfev': int(result.nfev),
            'x': result.x.tolist(),
            'x0': x0.tolist(),
        }
        if result.status <= 0:
            raise FitError(ERROR_MESSAGES['fit_failed'].format(message=result.message), diagnostic)
        amplitude, time_constant = float(result.x[0]), float(result.x[1])
        if not time_constant > 0 or not math.isfinite(time_constant):
            raise FitError(ERROR_MESSAGES['negative_time_constant'].format(value=time_constant),
                           diagnostic)

        dof = y.size - x0.size
        jtj = result.jac.T @ result.jac
        covariance = np.linalg.pinv(jtj)
        if sigma is None:
            variance = 2.0 * result.cost / dof if dof > 0 else 0.0
            covariance = variance * covariance
        covariance = 0.5 * (covariance + covariance.T)
        residual_norm = float(np.linalg.norm(result.fun))
        logger.debug("Decay fit T=%.6g A=%.6g residual=%.3g", time_constant, amplitude,
                     residual_norm)
        return DecayFit(
            amplitude=amplitude,
            time_constant=time_constant,
            offset=float(result.x[2]) if with_offset else None,
            covariance=covariance,
            residual_norm=residual_norm,
            iterations=int(result.nfev),
            weighted=sigma is not None,
        )

    def _initial_guess(self, t: np.ndarray, y: np.ndarray, with_offset: bool) -> np.ndarray:
        span = float(t.max() - t.min()) or 1.0
        offset = 0.0
        if with_offset:
            value_range = float(y.max() - y.min()) or 1.0
            # Decaying curves sit above the offset, rising ones below it.
            if y[0] >= y[-1]:
                offset = float(y.min()) - 0.05 * value_range
            else:
                offset = float(y.max()) + 0.05 * value_range
        shifted = y - offset
        sign = 1.0 if np.sum(shifted) >= 0 else -1.0
        mask = sign * shifted > 0
        if np.count_nonzero(mask) >= 2:
            slope, intercept = np.polyfit(t[mask], np.log(sign * shifted[mask]), 1)
            time_constant = -1.0 / slope if slope < 0 else 10.0 * span
            amplitude = sign * math.exp(intercept)
        else:
            time_constant = 0.5 * span
            amplitude = float(shifted[0]) or sign
        guess = [amplitude, time_constant] + ([offset] if with_offset else [])
        return np.asarray(guess, dtype=float)


@dataclass
class OscillationFit:
    """Result of fitting B + A exp(-rate t) cos(2 pi f t + phase)."""

    amplitude: float
    decay_rate: float
    frequency: float
    phase: float
    offset: float
    residual_norm: float

    @property
    def decay_time(self) -> float:
        return 1.0 / self.decay_rate if self.decay_rate > 0 else math.inf


def fit_damped_cosine(t: Sequence[float], y: Sequence[float],
                      frequency_range: Tuple[float, float], grid_points: int = 801,
                      with_decay: bool = True) -> OscillationFit:
    """
    Fit a (damped) cosine after a coarse frequency scan.

    For every trial frequency the offset and the quadratures are solved
    linearly; the best trial seeds a Levenberg-Marquardt refinement.

    Args:
        t: Sample times
        y: Samples
        frequency_range: (low, high) trial frequencies in cycles per time unit
        grid_points: Number of trial frequencies
        with_decay: Fit an exponential envelope

    Returns:
        OscillationFit

    Raises:
        FitError: If the refinement fails
    """
    t = validate_finite_array(t, 't', FIT_SETTINGS['min_points'])
    y = validate_finite_array(y, 'y', FIT_SETTINGS['min_points'])
    trials = np.linspace(frequency_range[0], frequency_range[1], grid_points)
    best = None
    for frequency in trials:
        phase = 2 * np.pi * frequency * t
        design = np.column_stack([np.ones_like(t), np.cos(phase), np.sin(phase)])
        coefficients, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
        cost = float(np.sum((design @ coefficients - y) ** 2))
        if best is None or cost < best[0]:
            best = (cost, frequency, coefficients)
    _, frequency, (offset, cos_part, sin_part) = best
    amplitude = math.hypot(cos_part, sin_part)
    phase0 = math.atan2(-sin_part, cos_part)

    def model(x):
        rate = x[1] if with_decay else 0.0
        return x[4] + x[0] * np.exp(-rate * t) * np.cos(2 * np.pi * x[2] * t + x[3])

    x0 = np.array([amplitude, 0.0, frequency, phase0, offset])
    if not with_decay:
        x0[1] = 0.0
    try:
        result = least_squares(lambda x: model(x) - y, x0, method='lm', x_scale='jac',
                               xtol=FIT_SETTINGS['step_tolerance'],
                               max_nfev=FIT_SETTINGS['max_iterations'] * 6)
    except Exception as e:
        raise FitError(ERROR_MESSAGES['fit_failed'].format(message=e), {'x0': x0.tolist()}) from e
    if result.status <= 0:
        raise FitError(ERROR_MESSAGES['fit_failed'].format(message=result.message),
                       {'x': result.x.tolist()})
    amplitude, rate, frequency, phase0, offset = (float(value) for value in result.x)
    if amplitude < 0:
        amplitude, phase0 = -amplitude, phase0 + math.pi
    return OscillationFit(
        amplitude=amplitude,
        decay_rate=rate if with_decay else 0.0,
        frequency=frequency,
        phase=float(np.angle(np.exp(1j * phase0))),
        offset=offset,
        residual_norm=float(np.linalg.norm(result.fun)),
    )


def fit_exp(t: Sequence[float], y: Sequence[float], with_offset: bool = False,
            sigma: Optional[Sequence[float]] = None) -> DecayFit:
    """
    Convenience function to fit an exponential decay.

    Args:
        t: Sample times
        y: Samples
        with_offset: Fit a constant offset
        sigma: Optional per-point standard deviations

    Returns:
        DecayFit
    """
    return ExponentialFitter().fit(t, y, with_offset, sigma)


def binomial_sigma(probabilities: Sequence[float], n_shots: int) -> np.ndarray:
    """Per-point binomial standard deviation, floored at 1/n_shots."""
    p = np.clip(np.asarray(probabilities, dtype=float), 0.0, 1.0)
    return np.sqrt(np.maximum(p * (1 - p), 1.0 / n_shots) / n_shots)


def pauli_probabilities(gamma_x: float, gamma_y: float, gamma_z: float,
                        t: float) -> Tuple[float, float, float]:
    """
    Pauli error probabilities of a Pauli channel after time t.

    Expectation values decay as <Z> ~ exp(-2(gx+gy)t), <X> ~ exp(-2(gy+gz)t),
    <Y> ~ exp(-2(gx+gz)t).

    Args:
        gamma_x: Bit-flip rate
        gamma_y: Y-error rate
        gamma_z: Phase-flip rate
        t: Elapsed time (>= 0)

    Returns:
        (p_X, p_Y, p_Z)
    """
    gamma_x = validate_rate(gamma_x, 'gamma_x')
    gamma_y = validate_rate(gamma_y, 'gamma_y')
    gamma_z = validate_rate(gamma_z, 'gamma_z')
    t = validate_rate(t, 't')
    lam_x = math.exp(-2 * (gamma_y + gamma_z) * t)
    lam_y = math.exp(-2 * (gamma_x + gamma_z) * t)
    lam_z = math.exp(-2 * (gamma_x + gamma_y) * t)
    p_x = 0.25 * (1 + lam_x - lam_y - lam_z)
    p_y = 0.25 * (1 - lam_x + lam_y - lam_z)
    p_z = 0.25 * (1 - lam_x - lam_y + lam_z)
    return p_x, p_y, p_z


def flip_times(decay_fit_z: DecayFit, decay_fit_x: DecayFit) -> Tuple[float, float]:
    """(T_bitflip, T_phaseflip) = (2 T_Z, 2 T_X)."""
    return 2.0 * decay_fit_z.time_constant, 2.0 * decay_fit_x.time_constant


def noise_bias(t_bitflip: float, t_phaseflip: float) -> float:
    """Ratio of bit-flip time to phase-flip time."""
    return t_bitflip / t_phaseflip


def cycle_error_probabilities(t_bitflip: float, t_phaseflip: float,
                              t_cycle: float) -> Tuple[float, float, float]:
    """Pauli error probabilities accumulated over one cycle of length t_cycle."""
    gamma_x = 1.0 / t_bitflip if math.isfinite(t_bitflip) else 0.0
    gamma_z = 1.0 / t_phaseflip if math.isfinite(t_phaseflip) else 0.0
    return pauli_probabilities(gamma_x, 0.0, gamma_z, t_cycle)


def fit_bitflip_scaling(alpha_sq_list: Sequence[float], times: Sequence[float],
                        model: str = 'exp_over_n') -> ScalingFit:
    """
    Fit T = c exp(gamma alpha^2) / alpha^2 ('exp_over_n') or T = c exp(gamma' alpha^2) ('exp').

    Args:
        alpha_sq_list: Photon numbers
        times: Bit-flip times (> 0)
        model: 'exp_over_n' or 'exp'

    Returns:
        ScalingFit

    Raises:
        ValidationError: Fewer than 3 points or non-positive times
        FitError: Degenerate design matrix
    """
    validate_choice(model, ('exp_over_n', 'exp'), 'model')
    alpha_sq = validate_finite_array(alpha_sq_list, 'alpha_sq_list', 3)
    times = validate_finite_array(times, 'times', 3)
    if alpha_sq.size != times.size:
        raise ValidationError("alpha_sq_list and times must have equal length", 'times')
    if np.any(times <= 0) or (model == 'exp_over_n' and np.any(alpha_sq <= 0)):
        raise ValidationError("Times and photon numbers must be positive for a log fit", 'times')
    response = np.log(times)
    if model == 'exp_over_n':
        response = response + np.log(alpha_sq)
    design = np.column_stack([np.ones_like(alpha_sq), alpha_sq])
    coefficients, _, rank, _ = np.linalg.lstsq(design, response, rcond=None)
    if rank < 2:
        raise FitError("Degenerate design matrix: photon numbers must differ",
                       {'alpha_sq': alpha_sq.tolist()})
    residual = response - design @ coefficients
    dof = alpha_sq.size - 2
    variance = float(residual @ residual) / dof if dof > 0 else 0.0
    covariance = variance * np.linalg.inv(design.T @ design)
    return ScalingFit(
        prefactor=float(math.exp(coefficients[0])),
        exponent=float(coefficients[1]),
        model=model,
        covariance=covariance,
        residual_norm=float(np.linalg.norm(residual)),
    )


def fit_phaseflip_linear(alpha_sq_list: Sequence[float],
                         gamma_z_list: Sequence[float]) -> PhaseFlipFit:
    """
    Line fits of phase-flip rate against photon number.

    Args:
        alpha_sq_list: Photon numbers
        gamma_z_list: Phase-flip rates

    Returns:
        PhaseFlipFit with the through-origin and free-intercept slopes
    """
    x = validate_finite_array(alpha_sq_list, 'alpha_sq_list', 2)
    y = validate_finite_array(gamma_z_list, 'gamma_z_list', 2)
    if x.size != y.size:
        raise ValidationError("alpha_sq_list and gamma_z_list must have equal length", 'gamma_z')
    denominator = float(x @ x)
    slope_origin = float(x @ y) / denominator if denominator > 0 else 0.0
    if np.ptp(x) > 0:
        slope_free, intercept = np.polyfit(x, y, 1)
    else:
        slope_free, intercept = slope_origin, 0.0
    return PhaseFlipFit(float(slope_origin), float(slope_free), float(intercept))


def sample_shots(probabilities: Sequence[float], shot_model: ShotModel,
                 stream: int = 0) -> np.ndarray:
    """
    Binomial(n_shots, p) / n_shots per point.

    Args:
        probabilities: Outcome probabilities
        shot_model: Shot count and seed
        stream: Random stream index (per-call counter)

    Returns:
        Noisy estimates

    Raises:
        ValidationError: If a probability leaves [0, 1] by more than 1e-3
    """
    p = np.asarray(probabilities, dtype=float)
    if not np.all(np.isfinite(p)):
        raise ValidationError("Probabilities must be finite", 'probabilities')
    excess = float(np.max(np.maximum(p - 1.0, -p), initial=0.0))
    if excess > PROBABILITY_CLIP_ERROR:
        raise ValidationError(f"Probability outside [0, 1] by {excess:.3g}", 'probabilities')
    if excess > PROBABILITY_CLIP_SILENT:
        warnings.warn(f"Clipping probabilities outside [0, 1] by {excess:.3g}", RuntimeWarning)
    p = np.clip(p, 0.0, 1.0)
    counts = shot_model.rng(stream).binomial(int(shot_model.n_shots), p)
    return counts / float(shot_model.n_shots)


# Export all metrology classes and functions
__all__ = [
    'DecayFit',
    'ScalingFit',
    'PhaseFlipFit',
    'ShotModel',
    'ExponentialFitter',
    'OscillationFit',
    'fit_damped_cosine',
    'exp_decay_model',
    'exp_decay_jacobian',
    'fit_exp',
    'binomial_sigma',
    'pauli_probabilities',
    'flip_times',
    'noise_bias',
    'cycle_error_probabilities',
    'fit_bitflip_scaling',
    'fit_phaseflip_linear',
    'sample_shots',
]
