"""
Storage-coupler-ancilla dispersive spectrum for catqubit-tools.

The storage is a harmonic mode, the tunable coupler and the ancilla are
transmons quantized in the charge basis. Bare modes are pre-diagonalized,
truncated, coupled through their charge operators and diagonalized
jointly; dressed levels are labeled by maximum overlap.

Units: GHz with h = 1, coupler flux in flux quanta.
"""

import logging
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import eigh
from scipy.optimize import least_squares, minimize_scalar

from ..utils.constants import (
    CHARGE_CUTOFF,
    COUPLER_INITIAL_GUESS,
    COUPLER_TUNING,
    DEFAULT_KEPT_LEVELS,
    DEVICE_COUPLER_TARGETS,
    ERROR_MESSAGES,
    LABEL_OVERLAP_FLOOR,
)
from ..utils.validation import (
    FitError,
    LabelingError,
    SpectralError,
    ValidationError,
    validate_finite_array,
    validate_positive,
)
from .circuits import label_dressed_states

logger = logging.getLogger(__name__)

# Dressed levels (storage, coupler, ancilla) used by the derived quantities
_REPORTED_LABELS = (
    (0, 0, 0), (1, 0, 0), (2, 0, 0), (0, 1, 0), (0, 0, 1),
    (1, 0, 1), (2, 0, 1), (1, 1, 0),
)
_CROSSING_LABELS = ((2, 0, 1), (0, 1, 2))


@dataclass(frozen=True)
class CouplerSystemParams:
    """Storage, flux-tunable coupler and ancilla transmon (GHz)."""

    omega_s0: float
    E_Cc: float
    E_J1c: float
    E_J2c: float
    E_Ca: float
    E_Ja: float
    lambda_sc: float
    lambda_ca: float
    lambda_sa: float

    def __post_init__(self):
        for name in ('omega_s0', 'E_Cc', 'E_J1c', 'E_Ca', 'E_Ja'):
            validate_positive(getattr(self, name), name)
        if self.E_J2c < 0:
            raise ValidationError("E_J2c must be >= 0", 'E_J2c')
        if abs(self.lambda_sc) >= abs(self.lambda_ca) and self.lambda_ca != 0:
            logger.info("lambda_sc >= lambda_ca: storage couples to the coupler more "
                        "strongly than the ancilla does")

    def replace(self, **changes) -> 'CouplerSystemParams':
        return replace(self, **changes)

    def coupler_josephson(self, flux: float) -> float:
        """Effective SQUID energy E_J1c + E_J2c at zero flux, E_J1c - E_J2c at half a quantum."""
        total = self.E_J1c + self.E_J2c
        asymmetry = (self.E_J1c - self.E_J2c) / total
        angle = math.pi * flux
        return total * math.sqrt(math.cos(angle) ** 2 + asymmetry ** 2 * math.sin(angle) ** 2)

    def to_vector(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in _PARAMETER_ORDER])

    @classmethod
    def from_vector(cls, vector: Sequence[float]) -> 'CouplerSystemParams':
        return cls(**dict(zip(_PARAMETER_ORDER, (float(v) for v in vector))))

    @classmethod
    def initial_guess(cls) -> 'CouplerSystemParams':
        return cls(**COUPLER_INITIAL_GUESS)


_PARAMETER_ORDER = ('omega_s0', 'E_Cc', 'E_J1c', 'E_J2c', 'E_Ca', 'E_Ja',
                    'lambda_sc', 'lambda_ca', 'lambda_sa')


@dataclass
class SpectrumResult:
    """Dressed spectrum at one coupler flux; unlabeled quantities are NaN."""

    flux: float
    energies: Dict[Tuple[int, int, int], float]
    overlaps: Dict[Tuple[int, int, int], float]
    flagged: List[Tuple[int, int, int]] = field(default_factory=list)

    def _energy(self, label: Tuple[int, int, int]) -> float:
        return self.energies.get(label, math.nan)

    @property
    def omega_s(self) -> float:
        return self._energy((1, 0, 0)) - self._energy((0, 0, 0))

    @property
    def omega_c(self) -> float:
        return self._energy((0, 1, 0)) - self._energy((0, 0, 0))

    @property
    def omega_a(self) -> float:
        return self._energy((0, 0, 1)) - self._energy((0, 0, 0))

    @property
    def chi_sa(self) -> float:
        e = self._energy
        return e((1, 0, 1)) - e((1, 0, 0)) - e((0, 0, 1)) + e((0, 0, 0))

    @property
    def K_s_g(self) -> float:
        e = self._energy
        return e((2, 0, 0)) - 2 * e((1, 0, 0)) + e((0, 0, 0))

    @property
    def K_s_e(self) -> float:
        e = self._energy
        return e((2, 0, 1)) - 2 * e((1, 0, 1)) + e((0, 0, 1))

    @property
    def chi_sc(self) -> float:
        e = self._energy
        return e((1, 1, 0)) - e((1, 0, 0)) - e((0, 1, 0)) + e((0, 0, 0))

    def to_row(self) -> Dict[str, float]:
        return {
            'flux': self.flux,
            'omega_s': self.omega_s,
            'omega_c': self.omega_c,
            'omega_a': self.omega_a,
            'chi_sa': self.chi_sa,
            'K_s_g': self.K_s_g,
            'K_s_e': self.K_s_e,
            'chi_sc': self.chi_sc,
            'flagged': float(len(self.flagged)),
        }


@dataclass(frozen=True)
class CrossingPoint:
    """Crossing pair at one flux; detuning is E(2,g_c,e_a) - E(0,e_c,f_a) dressed."""

    flux: float
    gap: float
    mixing: float
    detuning: float
    span: float

    @property
    def trackable(self) -> bool:
        return self.span >= LABEL_OVERLAP_FLOOR


@dataclass
class CouplerResonance:
    """Avoided crossing between |2,g_c,e_a> and |0,e_c,f_a>."""

    found: bool
    flux: float
    gap: float
    mixing: float
    scan: Dict[str, np.ndarray]
    untrackable: List[float] = field(default_factory=list)


@dataclass
class TuningResult:
    """Outcome of fitting the coupler model to device targets."""

    params: CouplerSystemParams
    residuals: Dict[str, float]
    cost: float
    initial_cost: float
    success: bool

    def to_report(self) -> Dict[str, object]:
        return {
            'params': asdict(self.params),
            'residuals': dict(self.residuals),
            'cost': self.cost,
            'initial_cost': self.initial_cost,
            'success': self.success,
        }


def transmon_charge_basis(E_C: float, E_J: float, cutoff: int = CHARGE_CUTOFF
                          ) -> Tuple[np.ndarray, np.ndarray]:
    """
    Transmon eigenenergies and charge-number operator in its eigenbasis.

    H = 4 E_C n^2 - E_J cos(phi) with n in [-cutoff, cutoff] (zero offset charge).

    Returns:
        (energies, charge operator in the eigenbasis)
    """
    charges = np.arange(-cutoff, cutoff + 1, dtype=float)
    hamiltonian = np.diag(4 * E_C * charges ** 2)
    hamiltonian -= 0.5 * E_J * (np.eye(charges.size, k=1) + np.eye(charges.size, k=-1))
    energies, vectors = eigh(hamiltonian)
    return energies, vectors.T @ np.diag(charges) @ vectors


class CouplerSpectrumSolver:
    """Joint diagonalization of storage, coupler and ancilla."""

    def __init__(self, kept_levels: Tuple[int, int, int] = DEFAULT_KEPT_LEVELS,
                 charge_cutoff: int = CHARGE_CUTOFF):
        """
        Initialize spectrum solver.

        Args:
            kept_levels: Bare levels kept for (storage, coupler, ancilla)
            charge_cutoff: Cooper-pair number cutoff of the transmon bases
        """
        kept_levels = tuple(int(level) for level in kept_levels)
        if len(kept_levels) != 3 or min(kept_levels) < 4:
            raise ValidationError("kept_levels needs >= 4 storage, coupler and ancilla levels",
                                  'kept_levels')
        self.kept_levels = kept_levels
        self.charge_cutoff = charge_cutoff

    def hamiltonian(self, params: CouplerSystemParams, flux: float
                    ) -> Tuple[np.ndarray, np.ndarray]:
        """
        Coupled Hamiltonian in the bare product basis, and the bare energies.

        Couplings: lambda_sc i(a^dag - a) N_c + lambda_ca N_c N_a + lambda_sa i(a^dag - a) N_a.
        """
        n_s, n_c, n_a = self.kept_levels
        a = np.diag(np.sqrt(np.arange(1, n_s, dtype=float)), 1)
        storage_charge = 1j * (a.T - a)
        storage_energies = params.omega_s0 * np.arange(n_s, dtype=float)

        coupler_energies, coupler_charge = transmon_charge_basis(
            params.E_Cc, params.coupler_josephson(flux), self.charge_cutoff)
        ancilla_energies, ancilla_charge = transmon_charge_basis(
            params.E_Ca, params.E_Ja, self.charge_cutoff)
        coupler_energies = coupler_energies[:n_c] - coupler_energies[0]
        ancilla_energies = ancilla_energies[:n_a] - ancilla_energies[0]
        coupler_charge = coupler_charge[:n_c, :n_c]
        ancilla_charge = ancilla_charge[:n_a, :n_a]

        eye_s, eye_c, eye_a = np.eye(n_s), np.eye(n_c), np.eye(n_a)
        bare = (storage_energies[:, None, None] + coupler_energies[None, :, None]
                + ancilla_energies[None, None, :]).ravel()
        hamiltonian = np.diag(bare).astype(complex)
        hamiltonian += params.lambda_sc * np.kron(np.kron(storage_charge, coupler_charge), eye_a)
        hamiltonian += params.lambda_ca * np.kron(np.kron(eye_s, coupler_charge), ancilla_charge)
        hamiltonian += params.lambda_sa * np.kron(np.kron(storage_charge, eye_c), ancilla_charge)
        return hamiltonian, bare

    def spectrum(self, params: CouplerSystemParams, flux: float,
                 labels: Sequence[Tuple[int, int, int]] = _REPORTED_LABELS) -> SpectrumResult:
        """
        Dressed energies of the requested bare labels at one flux.

        Levels whose overlap with their bare label falls below 0.5 are
        flagged and reported as NaN.
        """
        hamiltonian, _ = self.hamiltonian(params, flux)
        try:
            dressed, states = eigh(hamiltonian)
        except Exception as e:
            raise SpectralError(ERROR_MESSAGES['spectral_failure'].format(error=e)) from e
        indices, overlaps = label_dressed_states(states, self.kept_levels, labels)
        energies, flagged = {}, []
        for label in labels:
            if overlaps[label] < LABEL_OVERLAP_FLOOR:
                flagged.append(label)
                logger.warning(ERROR_MESSAGES['label_failure'].format(label=label,
                                                                      overlap=overlaps[label]))
                continue
            energies[label] = float(dressed[indices[label]])
        return SpectrumResult(float(flux), energies, overlaps, flagged)

    def sweep(self, params: CouplerSystemParams,
              flux_list: Sequence[float]) -> List[SpectrumResult]:
        return [self.spectrum(params, flux) for flux in validate_finite_array(flux_list, 'flux')]

    def crossing_branches(self, params: CouplerSystemParams, flux: float) -> CrossingPoint:
        """
        Gap and hybridization of the two dressed states spanning the crossing pair.

        The pair |2,g_c,e_a> / |0,e_c,f_a> is carried by the two dressed states
        with the largest weight on it. When either carries less than the
        labeling floor the point is untrackable (third states take part).
        """
        hamiltonian, _ = self.hamiltonian(params, flux)
        try:
            dressed, states = eigh(hamiltonian)
        except Exception as e:
            raise SpectralError(ERROR_MESSAGES['spectral_failure'].format(error=e)) from e
        pair = [int(np.ravel_multi_index(label, self.kept_levels)) for label in _CROSSING_LABELS]
        weights = np.abs(states[pair, :]) ** 2
        span = weights.sum(axis=0)
        top = np.argsort(span)[-2:]
        first = top[int(np.argmax(weights[0, top]))]
        second = top[0] if first == top[1] else top[1]
        return CrossingPoint(
            flux=float(flux),
            gap=abs(float(dressed[top[1]] - dressed[top[0]])),
            mixing=float(np.min(weights[:, top[1]]) / span[top[1]]),
            detuning=float(dressed[first] - dressed[second]),
            span=float(np.min(span[top])),
        )

    def find_resonance(self, params: CouplerSystemParams, flux_scan: Sequence[float],
                       mixing_floor: float = 0.2) -> CouplerResonance:
        """
        Locate the |2,g_c,e_a> / |0,e_c,f_a> avoided crossing along a flux scan.

        Points where the pair is not carried by two dressed states are kept in
        the scan with a NaN gap and listed as untrackable; the minimum is taken
        over the trackable points.

        Args:
            params: Model parameters
            flux_scan: Increasing flux values, step <= 0.005 flux quanta
            mixing_floor: Smallest hybridization accepted as a resonance

        Returns:
            CouplerResonance (found is False when the branches never hybridize)

        Raises:
            LabelingError: If no point of the scan is trackable
        """
        fluxes = validate_finite_array(flux_scan, 'flux_scan', 3)
        if np.max(np.diff(fluxes)) > 0.005 + 1e-12:
            raise ValidationError("Flux scan step must be <= 0.005 flux quanta", 'flux_scan')
        points = [self.crossing_branches(params, flux) for flux in fluxes]
        gaps = np.array([p.gap if p.trackable else math.nan for p in points])
        untrackable = [p.flux for p in points if not p.trackable]
        scan = {
            'flux': fluxes,
            'gap': gaps,
            'mixing': np.array([p.mixing for p in points]),
            'detuning': np.array([p.detuning for p in points]),
            'span': np.array([p.span for p in points]),
        }
        if untrackable:
            logger.warning("Crossing pair untrackable at %d of %d fluxes (%.4f-%.4f)",
                           len(untrackable), fluxes.size, min(untrackable), max(untrackable))
        if np.all(np.isnan(gaps)):
            raise LabelingError("Crossing pair not carried by two dressed states anywhere "
                                f"in the scan {fluxes[0]:.4g}-{fluxes[-1]:.4g}")

        best = int(np.nanargmin(gaps))
        step = float(np.max(np.diff(fluxes)))
        low, high = max(fluxes[0], fluxes[best] - step), min(fluxes[-1], fluxes[best] + step)

        def refined_gap(x: float) -> float:
            point = self.crossing_branches(params, x)
            return point.gap if point.trackable else math.inf

        refined = minimize_scalar(refined_gap, bounds=(low, high), method='bounded',
                                  options={'xatol': 1e-7})
        chosen = points[best]
        if np.isfinite(refined.fun) and refined.fun <= gaps[best]:
            chosen = self.crossing_branches(params, float(refined.x))
        found = chosen.mixing >= mixing_floor
        if found:
            logger.info("Coupler resonance at flux %.5f, gap %.4g GHz", chosen.flux, chosen.gap)
        return CouplerResonance(found, chosen.flux if found else math.nan, chosen.gap,
                                chosen.mixing, scan, untrackable)


def _target_residuals(solver: CouplerSpectrumSolver, params: CouplerSystemParams,
                      targets: Dict[str, float]) -> Dict[str, float]:
    at_zero = solver.spectrum(params, 0.0)
    at_half = solver.spectrum(params, 0.5)
    at_038 = solver.spectrum(params, 0.38)
    crossing = solver.crossing_branches(params, targets['crossing_flux'])
    frequency_scale, shift_scale = 0.01, 0.005
    return {
        'omega_c_max': (at_zero.omega_c - targets['omega_c_max']) / frequency_scale,
        'omega_c_min': (at_half.omega_c - targets['omega_c_min']) / frequency_scale,
        'omega_a': (at_zero.omega_a - targets['omega_a']) / frequency_scale,
        'omega_s': (at_zero.omega_s - targets['omega_s']) / frequency_scale,
        'omega_s_shift': (at_half.omega_s - at_zero.omega_s - targets['omega_s_shift'])
        / shift_scale,
        'omega_a_shift': (at_half.omega_a - at_zero.omega_a - targets['omega_a_shift'])
        / shift_scale,
        'chi_sa_half': (at_half.chi_sa - targets['chi_sa_half'])
        / (0.01 * abs(targets['chi_sa_half'])),
        'chi_sa_038': (at_038.chi_sa - targets['chi_sa_038'])
        / (0.01 * abs(targets['chi_sa_038'])),
        'crossing': crossing.detuning / COUPLER_TUNING['crossing_scale'],
    }


def _seed_candidates(initial: CouplerSystemParams,
                     omega_a: float) -> List[CouplerSystemParams]:
    # Coarse grid over the couplings that set chi_sa and the ancilla charging
    # energy that sets the crossing; E_Ja follows E_Ca to keep omega_a in place
    candidates = [initial]
    for E_Ca in COUPLER_TUNING['seed_E_Ca']:
        E_Ja = (omega_a + E_Ca) ** 2 / (8 * E_Ca)
        for lambda_sa in COUPLER_TUNING['seed_lambda_sa']:
            for factor in COUPLER_TUNING['seed_lambda_sc_factor']:
                candidates.append(initial.replace(E_Ca=E_Ca, E_Ja=E_Ja, lambda_sa=lambda_sa,
                                                  lambda_sc=initial.lambda_sc * factor))
    return candidates


def tune_coupler_model(initial: Optional[CouplerSystemParams] = None,
                       targets: Optional[Dict[str, float]] = None,
                       kept_levels: Tuple[int, int, int] = DEFAULT_KEPT_LEVELS,
                       max_evaluations: int = 400,
                       starts: int = COUPLER_TUNING['starts']) -> TuningResult:
    """
    Least-squares tuning of the coupler model to measured device values.

    Targets are the coupler frequency range, storage and ancilla frequencies
    and their shifts across the flux range, chi_sa at two fluxes and the
    flux where the |2,g_c,e_a> / |0,e_c,f_a> pair crosses. A coarse grid
    over the couplings and the ancilla charging energy seeds the fit; the
    best seeds are refined with trust-region least squares.

    Args:
        initial: Starting parameters (device-scale guess if None)
        targets: Target values (device values if None)
        kept_levels: Bare levels kept
        max_evaluations: Residual evaluation budget per refined seed
        starts: Number of seeds refined

    Returns:
        TuningResult for the best refined seed

    Raises:
        FitError: If the optimizer fails
    """
    initial = initial or CouplerSystemParams.initial_guess()
    targets = dict(DEVICE_COUPLER_TARGETS, **(targets or {}))
    solver = CouplerSpectrumSolver(kept_levels)
    scale = np.abs(initial.to_vector())
    scale[scale == 0] = 1.0

    def residual(x: np.ndarray) -> np.ndarray:
        try:
            values = _target_residuals(solver, CouplerSystemParams.from_vector(x * scale), targets)
        except (LabelingError, ValidationError):
            return np.full(len(targets), 1e3)
        vector = np.array(list(values.values()))
        return np.where(np.isfinite(vector), vector, 1e3)

    def cost(x: np.ndarray) -> float:
        return 0.5 * float(np.sum(residual(x) ** 2))

    initial_cost = cost(np.ones_like(scale))
    seeds = sorted(((cost(c.to_vector() / scale), c.to_vector() / scale)
                    for c in _seed_candidates(initial, targets['omega_a'])),
                   key=lambda item: item[0])[:max(1, starts)]
    logger.info("Coupler tuning seeds: costs %s", [round(c, 4) for c, _ in seeds])

    best = None
    for seed_cost, x0 in seeds:
        try:
            result = least_squares(residual, x0, method='trf', x_scale='jac',
                                   max_nfev=max_evaluations)
        except Exception as e:
            raise FitError(ERROR_MESSAGES['fit_failed'].format(message=e),
                           {'initial': asdict(initial)}) from e
        logger.debug("Seed cost %.4g -> %.4g in %d evaluations", seed_cost, result.cost,
                     result.nfev)
        if best is None or result.cost < best.cost:
            best = result
    tuned = CouplerSystemParams.from_vector(best.x * scale)
    residuals = _target_residuals(solver, tuned, targets)
    logger.info("Coupler tuning: cost %.4g -> %.4g", initial_cost, best.cost)
    return TuningResult(tuned, residuals, float(best.cost), initial_cost, bool(best.success))


# Convenience functions
def coupler_spectrum(params: CouplerSystemParams, flux_list: Sequence[float],
                     kept_levels: Tuple[int, int, int] = DEFAULT_KEPT_LEVELS
                     ) -> List[SpectrumResult]:
    """Dressed spectrum per flux value."""
    return CouplerSpectrumSolver(kept_levels).sweep(params, flux_list)


def find_coupler_resonance(params: CouplerSystemParams, flux_scan: Sequence[float],
                           kept_levels: Tuple[int, int, int] = DEFAULT_KEPT_LEVELS
                           ) -> CouplerResonance:
    """Avoided crossing between |2,g_c,e_a> and |0,e_c,f_a>."""
    return CouplerSpectrumSolver(kept_levels).find_resonance(params, flux_scan)


# Export all coupler classes and functions
__all__ = [
    'CouplerSystemParams',
    'SpectrumResult',
    'CrossingPoint',
    'CouplerResonance',
    'TuningResult',
    'CouplerSpectrumSolver',
    'transmon_charge_basis',
    'coupler_spectrum',
    'find_coupler_resonance',
    'tune_coupler_model',
]
