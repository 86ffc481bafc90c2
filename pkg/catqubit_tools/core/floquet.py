"""
Floquet analysis of the flux-pumped ATS buffer for catqubit-tools.

The periodically pumped Hamiltonian is represented in an expanded Hilbert
space with a fictitious pump-photon ladder. Dressed static levels are
tracked across a pump-frequency scan by maximum overlap; labeling failures
and kinks in the Stark-shifted buffer frequency mark resonances, which are
then classified by the integer frequency condition they satisfy.

Units: frequencies in GHz with h = 1.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import eigh

from ..utils.constants import DEFAULT_OSCILLATOR_DIM, FLOQUET_SETTINGS, LABEL_OVERLAP_FLOOR
from ..utils.validation import (
    LabelingError,
    ValidationError,
    validate_dimension,
    validate_finite_array,
    validate_positive,
)
from .circuits import ATSParams, ATSQuantizer, label_dressed_states

logger = logging.getLogger(__name__)

Label = Tuple[int, int]
DESIRED_CONDITION = (1, 2, -1)

GROUND: Label = (0, 0)
BUFFER_PHOTON: Label = (0, 1)
STORAGE_PHOTON: Label = (1, 0)


@dataclass(frozen=True)
class PumpMode:
    """Pump-photon ladder n_p in [-cutoff, cutoff]."""

    cutoff: int
    omega_p: float
    epsilon_p: float

    def __post_init__(self):
        validate_dimension(self.cutoff, 2, 'cutoff')
        validate_positive(self.omega_p, 'omega_p')

    @property
    def dim(self) -> int:
        return 2 * self.cutoff + 1


@dataclass
class StaticSystem:
    """
    Undriven buffer (optionally with storage) in its dressed eigenbasis.

    Attributes:
        energies: Dressed energies relative to the ground state
        sin_phi: sin(phi_b) in the dressed basis
        cos_phi: cos(phi_b) in the dressed basis
        labels: Bare (n_s, n_b) label of each kept dressed level, None when
            no bare state reaches the labeling overlap floor
        E_J1: Side-junction energy carried by the pump terms
        E_J2: Side-junction energy carried by the pump terms
        has_storage: Whether a storage mode is included
    """

    energies: np.ndarray
    sin_phi: np.ndarray
    cos_phi: np.ndarray
    labels: List[Optional[Label]]
    E_J1: float
    E_J2: float
    has_storage: bool = False

    @property
    def dim(self) -> int:
        return self.energies.size

    def level(self, label: Label) -> int:
        try:
            return self.labels.index(tuple(label))
        except ValueError:
            raise ValidationError(f"Level {label} is not among the kept levels", 'label')

    def frequency(self, label: Label) -> float:
        return float(self.energies[self.level(label)] - self.energies[self.level(GROUND)])


@dataclass
class FloquetSystem:
    """Static system, pump mode and the expanded-space Hamiltonian."""

    static: StaticSystem
    pump: PumpMode
    hamiltonian: np.ndarray

    def index(self, level: int, n_p: int) -> int:
        return level * self.pump.dim + n_p + self.pump.cutoff


@dataclass
class StarkScan:
    """
    Per (epsilon_p, omega_p) labeled frequencies, overlaps and partner data.

    level_energies and level_overlaps hold, for every static level, the
    quasi-energy of its n_p = 0 replica (relative to the ground) and the
    overlap it was tracked with; their last axis follows labels.
    """

    omega_p: np.ndarray
    epsilon_p: np.ndarray
    omega_b: np.ndarray
    omega_s: np.ndarray
    overlap: np.ndarray
    partner_gap: np.ndarray
    partners: List[List[Optional[Tuple[Label, int]]]]
    labels: List[Optional[Label]]
    level_energies: np.ndarray
    level_overlaps: np.ndarray
    has_storage: bool

    @property
    def flagged(self) -> np.ndarray:
        return self.overlap < LABEL_OVERLAP_FLOOR

    @classmethod
    def concatenate(cls, scans: Sequence['StarkScan']) -> 'StarkScan':
        """Stack scans over the same pump grid along the amplitude axis."""
        if not scans:
            raise ValidationError("No scans to concatenate", 'scans')
        grid = scans[0].omega_p
        for scan in scans[1:]:
            if scan.omega_p.shape != grid.shape or not np.allclose(scan.omega_p, grid):
                raise ValidationError("Scans use different pump grids", 'omega_p')
            if scan.labels != scans[0].labels:
                raise ValidationError("Scans use different static systems", 'labels')
        return cls(
            omega_p=grid,
            epsilon_p=np.concatenate([scan.epsilon_p for scan in scans]),
            omega_b=np.vstack([scan.omega_b for scan in scans]),
            omega_s=np.vstack([scan.omega_s for scan in scans]),
            overlap=np.vstack([scan.overlap for scan in scans]),
            partner_gap=np.vstack([scan.partner_gap for scan in scans]),
            partners=[row for scan in scans for row in scan.partners],
            labels=scans[0].labels,
            level_energies=np.concatenate([scan.level_energies for scan in scans]),
            level_overlaps=np.concatenate([scan.level_overlaps for scan in scans]),
            has_storage=scans[0].has_storage,
        )

    def to_columns(self) -> Dict[str, np.ndarray]:
        return {
            'epsilon_p': np.repeat(self.epsilon_p, self.omega_p.size),
            'omega_p': np.tile(self.omega_p, self.epsilon_p.size),
            'omega_b': self.omega_b.ravel(),
            'omega_s': self.omega_s.ravel(),
            'overlap': self.overlap.ravel(),
            'flag': self.flagged.ravel().astype(float),
        }


@dataclass
class Resonance:
    """One clustered resonance feature."""

    omega_p: float
    epsilon_p: float
    min_gap: float
    classification: str
    condition: Optional[Tuple[int, int, int]] = None
    partner: Optional[Tuple[Label, int]] = None
    predicted_omega_p: Optional[float] = None
    indices: List[int] = field(default_factory=list)

    def to_row(self) -> Dict[str, object]:
        return {
            'omega_p': self.omega_p,
            'epsilon_p': self.epsilon_p,
            'min_gap': self.min_gap,
            'classification': self.classification,
            'condition': list(self.condition) if self.condition else None,
            'partner': ([list(self.partner[0]), self.partner[1]] if self.partner else None),
            'predicted_omega_p': self.predicted_omega_p,
        }


@dataclass
class ResonanceReport:
    resonances: List[Resonance]

    @property
    def desired(self) -> List[Resonance]:
        return [r for r in self.resonances if r.classification == 'desired-3WM']

    @property
    def undesired(self) -> List[Resonance]:
        return [r for r in self.resonances if r.classification == 'identified-undesired']


def pump_operators(cutoff: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Pump-photon number and cos(phi_p) on the ladder n_p = -cutoff..cutoff.

    Returns:
        (N_p, cos_phi_p), the latter with 1/2 on both off-diagonals
    """
    validate_dimension(cutoff, 1, 'cutoff')
    dim = 2 * cutoff + 1
    number = np.diag(np.arange(-cutoff, cutoff + 1, dtype=float))
    cos_phi = 0.5 * (np.eye(dim, k=1) + np.eye(dim, k=-1))
    return number, cos_phi


def _symmetric_function(matrix: np.ndarray, function) -> np.ndarray:
    values, vectors = np.linalg.eigh(matrix)
    return (vectors * function(values)) @ vectors.T


def _saddle(ats: ATSParams) -> ATSParams:
    return ats.replace(phi_sigma=math.pi / 2, phi_delta=math.pi / 2)


def buffer_system(ats: ATSParams, levels: int = FLOQUET_SETTINGS['static_levels'],
                  oscillator_dim: int = DEFAULT_OSCILLATOR_DIM) -> StaticSystem:
    """
    Buffer-only static system at the saddle point.

    H_b = 4 E_C n^2 - N E_J_array cos(phi/N) + (E_J1 - E_J2) cos(phi)
    (plus serial-inductance corrections when E_LP is finite).
    """
    quantizer = ATSQuantizer(oscillator_dim, check_convergence=False)
    energies, vectors, phi = quantizer.eigensystem(_saddle(ats))
    levels = min(levels, energies.size)
    kept = vectors[:, :levels]
    sin_phi = kept.T @ _symmetric_function(phi, np.sin) @ kept
    cos_phi = kept.T @ _symmetric_function(phi, np.cos) @ kept
    return StaticSystem(
        energies=energies[:levels] - energies[0],
        sin_phi=sin_phi,
        cos_phi=cos_phi,
        labels=[(0, n) for n in range(levels)],
        E_J1=ats.E_J1,
        E_J2=ats.E_J2,
        has_storage=False,
    )


def storage_buffer_system(ats: ATSParams, omega_s0: float, g_sb: float,
                          storage_dim: int = 8, buffer_levels: int = 10,
                          levels: int = FLOQUET_SETTINGS['static_levels'],
                          oscillator_dim: int = DEFAULT_OSCILLATOR_DIM) -> StaticSystem:
    """
    Storage coupled to the buffer, diagonalized and truncated to the lowest levels.

    The coupling is g_sb (a + a^dag)(b + b^dag) with b + b^dag = phi / phi_zpf.
    Dressed levels carry the bare (n_s, n_b) label of maximum overlap; levels
    below the overlap floor stay unlabeled. Energies are measured from the
    level labeled (0, 0).

    Raises:
        LabelingError: If the ground, one-storage-photon or one-buffer-photon
            level is not labeled among the kept levels
    """
    validate_positive(omega_s0, 'omega_s0')
    quantizer = ATSQuantizer(oscillator_dim, check_convergence=False)
    saddle = _saddle(ats)
    energies, vectors, phi = quantizer.eigensystem(saddle)
    kept = vectors[:, :buffer_levels]
    buffer_energies = energies[:buffer_levels] - energies[0]
    phi_b = kept.T @ phi @ kept
    sin_b = kept.T @ _symmetric_function(phi, np.sin) @ kept
    cos_b = kept.T @ _symmetric_function(phi, np.cos) @ kept

    a = np.diag(np.sqrt(np.arange(1, storage_dim, dtype=float)), 1)
    eye_s, eye_b = np.eye(storage_dim), np.eye(buffer_levels)
    hamiltonian = (np.kron(omega_s0 * np.diag(np.arange(storage_dim, dtype=float)), eye_b)
                   + np.kron(eye_s, np.diag(buffer_energies))
                   + g_sb * np.kron(a + a.T, phi_b / saddle.phi_zpf))
    dressed, states = eigh(hamiltonian)
    levels = min(levels, dressed.size)
    every = [(s, b) for s in range(storage_dim) for b in range(buffer_levels)]
    indices, overlaps = label_dressed_states(states, (storage_dim, buffer_levels), every)
    by_index = {index: label for label, index in indices.items()}
    labels: List[Optional[Label]] = []
    for index in range(levels):
        label = by_index[index]
        labels.append(label if overlaps[label] >= LABEL_OVERLAP_FLOOR else None)
    unlabeled = [index for index, label in enumerate(labels) if label is None]
    if unlabeled:
        logger.warning("Static levels %s left unlabeled (overlap below %.2f)",
                       unlabeled, LABEL_OVERLAP_FLOOR)
    missing = [label for label in (GROUND, STORAGE_PHOTON, BUFFER_PHOTON) if label not in labels]
    if missing:
        raise LabelingError(
            f"Static levels {missing} not labeled at g_sb={g_sb:g} GHz; "
            f"reduce the coupling or raise storage_dim/buffer_levels"
        )

    kept_states = states[:, :levels]
    ground = dressed[labels.index(GROUND)]
    return StaticSystem(
        energies=dressed[:levels] - ground,
        sin_phi=kept_states.T @ np.kron(eye_s, sin_b) @ kept_states,
        cos_phi=kept_states.T @ np.kron(eye_s, cos_b) @ kept_states,
        labels=labels,
        E_J1=ats.E_J1,
        E_J2=ats.E_J2,
        has_storage=True,
    )


def build_floquet(static: StaticSystem, pump: PumpMode) -> FloquetSystem:
    """
    Expanded-space Hamiltonian of the pumped system.

    H_F = H_static x I + I x omega_p N_p
          - (E_J1 + E_J2) sin(phi_b) x sin(eps cos phi_p)
          - (E_J1 - E_J2) cos(phi_b) x (1 - cos(eps cos phi_p))

    Raises:
        ValidationError: On operator shape mismatch or a non-hermitian result
    """
    if static.sin_phi.shape != (static.dim, static.dim) or static.cos_phi.shape != (static.dim,
                                                                                    static.dim):
        raise ValidationError("Static operators do not match the kept levels", 'static')
    number, cos_phi_p = pump_operators(pump.cutoff)
    eye_p = np.eye(pump.dim)
    sin_drive = _symmetric_function(cos_phi_p, lambda x: np.sin(pump.epsilon_p * x))
    cos_drive = _symmetric_function(cos_phi_p, lambda x: np.cos(pump.epsilon_p * x))
    hamiltonian = (np.kron(np.diag(static.energies), eye_p)
                   + pump.omega_p * np.kron(np.eye(static.dim), number)
                   - (static.E_J1 + static.E_J2) * np.kron(static.sin_phi, sin_drive)
                   - (static.E_J1 - static.E_J2) * np.kron(static.cos_phi, eye_p - cos_drive))
    scale = max(1.0, float(np.max(np.abs(hamiltonian))))
    if np.max(np.abs(hamiltonian - hamiltonian.T)) > 1e-10 * scale:
        raise ValidationError("Floquet Hamiltonian is not hermitian", 'hamiltonian')
    return FloquetSystem(static, pump, 0.5 * (hamiltonian + hamiltonian.T))


def resonance_condition(k: int, m_s: int, m_b: int, omega_s: float, omega_b: float) -> float:
    """Pump frequency solving k omega_p = m_s omega_s + m_b omega_b."""
    if k == 0:
        raise ValidationError("Pump order k must be non-zero", 'k')
    return (m_s * omega_s + m_b * omega_b) / k


def classify_condition(condition: Optional[Tuple[int, int, int]]) -> str:
    if condition is None:
        return 'unidentified'
    if tuple(condition) == DESIRED_CONDITION:
        return 'desired-3WM'
    return 'identified-undesired'


class FloquetAnalyzer:
    """Stark scans and resonance discovery for the pumped buffer."""

    def __init__(self, cutoff: int = FLOQUET_SETTINGS['cutoff'],
                 edge_replicas: int = FLOQUET_SETTINGS['edge_replicas'],
                 overlap_floor: float = LABEL_OVERLAP_FLOOR):
        """
        Initialize Floquet analyzer.

        Args:
            cutoff: Pump-photon cutoff M
            edge_replicas: Outer replicas ignored when identifying partners
            overlap_floor: Smallest overlap accepted for a label
        """
        self.cutoff = validate_dimension(cutoff, 2, 'cutoff')
        self.edge_replicas = edge_replicas
        self.overlap_floor = overlap_floor

    def analyze_point(self, static: StaticSystem, omega_p: float, epsilon_p: float
                      ) -> Dict[str, object]:
        """
        Diagonalize H_F at one pump setting and track the labeled levels.

        Returns:
            Dict with omega_b, omega_s, overlap (smallest of the tracked
            labels), partner_gap, partner ((n_s, n_b), n_p) of the state
            hybridizing with the one-buffer-photon level, and the per-level
            level_energies and level_overlaps of the n_p = 0 replicas
        """
        system = build_floquet(static, PumpMode(self.cutoff, omega_p, epsilon_p))
        energies, vectors = eigh(system.hamiltonian)
        rows = np.abs(vectors[[system.index(level, 0) for level in range(static.dim)], :]) ** 2
        columns = np.argmax(rows, axis=1)
        level_overlaps = rows[np.arange(static.dim), columns]
        level_energies = energies[columns] - energies[columns[static.level(GROUND)]]

        tracked = [GROUND, BUFFER_PHOTON] + ([STORAGE_PHOTON] if static.has_storage else [])
        overlap = min(float(level_overlaps[static.level(label)]) for label in tracked)
        omega_b = float(level_energies[static.level(BUFFER_PHOTON)])
        omega_s = (float(level_energies[static.level(STORAGE_PHOTON)])
                   if static.has_storage else math.nan)

        reference = system.index(static.level(BUFFER_PHOTON), 0)
        row = np.abs(vectors[reference, :]) ** 2
        order = np.argsort(row)[::-1]
        main, second = int(order[0]), int(order[1])
        partner_gap = abs(float(energies[main] - energies[second]))
        weights = np.abs(vectors[:, second]) ** 2
        weights[reference] = 0.0
        dominant = int(np.argmax(weights))
        level, replica = divmod(dominant, system.pump.dim)
        n_p = replica - self.cutoff
        partner = None
        if abs(n_p) <= self.cutoff - self.edge_replicas and static.labels[level] is not None:
            partner = (static.labels[level], n_p)
        return {
            'omega_b': omega_b,
            'omega_s': omega_s,
            'overlap': overlap,
            'partner_gap': partner_gap,
            'partner': partner,
            'level_energies': level_energies,
            'level_overlaps': level_overlaps,
        }

    def stark_scan(self, static: StaticSystem, omega_p_grid: Sequence[float],
                   epsilon_p_list: Sequence[float]) -> StarkScan:
        """
        Stark-shifted buffer (and storage) frequency versus pump frequency.

        Args:
            static: Static system
            omega_p_grid: Strictly increasing pump frequencies (GHz)
            epsilon_p_list: Pump amplitudes (radians of flux)

        Returns:
            StarkScan with arrays shaped (len(epsilon_p_list), len(omega_p_grid))
        """
        grid = validate_finite_array(omega_p_grid, 'omega_p_grid', 3)
        if np.any(np.diff(grid) <= 0):
            raise ValidationError("omega_p_grid must be strictly increasing", 'omega_p_grid')
        epsilons = validate_finite_array(epsilon_p_list, 'epsilon_p_list')
        shape = (epsilons.size, grid.size)
        omega_b, omega_s = np.empty(shape), np.empty(shape)
        overlap, partner_gap = np.empty(shape), np.empty(shape)
        level_energies = np.empty(shape + (static.dim,))
        level_overlaps = np.empty(shape + (static.dim,))
        partners: List[List[Optional[Tuple[Label, int]]]] = []
        for i, epsilon in enumerate(epsilons):
            row_partners = []
            for j, omega_p in enumerate(grid):
                point = self.analyze_point(static, float(omega_p), float(epsilon))
                omega_b[i, j] = point['omega_b']
                omega_s[i, j] = point['omega_s']
                overlap[i, j] = point['overlap']
                partner_gap[i, j] = point['partner_gap']
                level_energies[i, j] = point['level_energies']
                level_overlaps[i, j] = point['level_overlaps']
                row_partners.append(point['partner'])
            partners.append(row_partners)
            flagged = int(np.count_nonzero(overlap[i] < self.overlap_floor))
            logger.info("Stark scan eps_p=%.4g: %d points, %d flagged", epsilon, grid.size, flagged)
        return StarkScan(grid, epsilons, omega_b, omega_s, overlap, partner_gap, partners,
                         list(static.labels), level_energies, level_overlaps, static.has_storage)

    def _feature_indices(self, curve: np.ndarray, overlap: np.ndarray) -> np.ndarray:
        curvature = np.zeros_like(curve)
        curvature[1:-1] = np.abs(curve[2:] - 2 * curve[1:-1] + curve[:-2])
        threshold = max(FLOQUET_SETTINGS['kink_factor'] * float(np.median(curvature[1:-1])),
                        FLOQUET_SETTINGS['kink_floor'])
        return np.flatnonzero((curvature > threshold) | (overlap < self.overlap_floor))

    @staticmethod
    def _clusters(indices: np.ndarray) -> List[List[int]]:
        clusters: List[List[int]] = []
        for index in indices.tolist():
            if clusters and index - clusters[-1][-1] <= FLOQUET_SETTINGS['cluster_gap']:
                clusters[-1].append(index)
            else:
                clusters.append([index])
        return clusters

    def _search_condition(self, omega_p: float, omega_s: float, omega_b: float,
                          tolerance: float, has_storage: bool) -> Optional[Tuple[int, int, int]]:
        best = None
        max_mode = FLOQUET_SETTINGS['max_mode_order']
        storage_orders = range(-max_mode, max_mode + 1) if has_storage else [0]
        for k in range(1, FLOQUET_SETTINGS['max_pump_order'] + 1):
            for m_s in storage_orders:
                for m_b in range(-max_mode, max_mode + 1):
                    if m_s == 0 and m_b == 0:
                        continue
                    storage = m_s * omega_s if m_s else 0.0
                    residual = abs(k * omega_p - storage - m_b * omega_b)
                    if not residual <= k * tolerance:
                        continue
                    key = (abs(k) + abs(m_s) + abs(m_b), residual)
                    if best is None or key < best[0]:
                        best = (key, (k, m_s, m_b))
        return best[1] if best else None

    @staticmethod
    def _condition_from_partner(partner: Optional[Tuple[Label, int]]
                                ) -> Optional[Tuple[int, int, int]]:
        # |0_s, 1_b, 0> meets |n_s, n_b, n_p> when -n_p omega_p = n_s omega_s + (n_b - 1) omega_b
        if partner is None:
            return None
        (n_s, n_b), n_p = partner
        k, m_s, m_b = -n_p, n_s, n_b - 1
        if k < 0:
            k, m_s, m_b = -k, -m_s, -m_b
        if (k == 0 or k > FLOQUET_SETTINGS['max_pump_order']
                or max(abs(m_s), abs(m_b)) > FLOQUET_SETTINGS['max_mode_order']):
            return None
        return k, m_s, m_b

    def _partner_crossing(self, scan: StarkScan, row: int, picks: List[int],
                          partner: Tuple[Label, int], min_gap: float) -> Optional[float]:
        """
        Pump frequency where the partner replica crosses the one-buffer-photon level.

        The quasi-energy detuning of the pair is sampled at the clean points
        next to the cluster, the avoided-crossing repulsion sqrt(d^2 + gap^2)
        is removed, and the zero is interpolated linearly.
        """
        label, n_p = partner
        if label not in scan.labels or n_p == 0:
            return None
        p, b = scan.labels.index(label), scan.labels.index(BUFFER_PHOTON)
        samples = []
        for j in picks:
            if min(scan.level_overlaps[row, j, p],
                   scan.level_overlaps[row, j, b]) < self.overlap_floor:
                continue
            split = (scan.level_energies[row, j, p] + n_p * scan.omega_p[j]
                     - scan.level_energies[row, j, b])
            detuning = math.copysign(math.sqrt(max(split ** 2 - min_gap ** 2, 0.0)), split)
            samples.append((float(scan.omega_p[j]), detuning))
        if len(samples) == 2 and samples[0][1] != samples[1][1]:
            (x0, d0), (x1, d1) = samples
            return x0 - d0 * (x1 - x0) / (d1 - d0)
        if samples:
            x, d = samples[0]
            return x - d / n_p
        return None

    def find_resonances(self, scan: StarkScan,
                        gap_threshold: float = FLOQUET_SETTINGS['gap_threshold']
                        ) -> ResonanceReport:
        """
        Cluster flagged and kinked scan points and classify each cluster.

        A cluster is kept when the smallest gap between the one-buffer-photon
        level and its hybridization partner stays below gap_threshold. The
        partner's bare label and pump-photon number propose the integer
        condition, located self-consistently from the tracked quasi-energies;
        otherwise small integer conditions are searched against the
        Stark-shifted frequencies next to the cluster. A condition is kept
        only when its predicted pump frequency lies within match_steps grid
        steps of the cluster; anything else is reported unidentified.

        Args:
            scan: Completed Stark scan
            gap_threshold: Largest avoided-crossing gap reported (GHz)

        Returns:
            ResonanceReport
        """
        step = float(np.min(np.diff(scan.omega_p)))
        tolerance = FLOQUET_SETTINGS['match_steps'] * step
        resonances = []
        for i, epsilon in enumerate(scan.epsilon_p):
            if epsilon == 0:
                continue
            curve = scan.omega_b[i]
            features = self._feature_indices(curve, scan.overlap[i])
            flagged = set(features.tolist())
            for cluster in self._clusters(features):
                gaps = scan.partner_gap[i, cluster]
                centre = cluster[int(np.argmin(gaps))]
                location = float(scan.omega_p[centre])
                min_gap = float(np.min(gaps))
                if min_gap > gap_threshold:
                    continue
                picks = self._neighbour_indices(scan.omega_p.size, cluster, flagged)
                partner = scan.partners[i][centre]
                condition = self._condition_from_partner(partner)
                predicted = None
                if condition is not None:
                    predicted = self._partner_crossing(scan, i, picks, partner, min_gap)
                    if predicted is None or abs(location - predicted) > tolerance:
                        logger.debug("Partner %s at %.4f GHz rejected (predicted %s)",
                                     partner, location, predicted)
                        condition, predicted = None, None
                if condition is None:
                    omega_s = float(np.mean(scan.omega_s[i, picks]))
                    omega_b = float(np.mean(scan.omega_b[i, picks]))
                    condition = self._search_condition(location, omega_s, omega_b, tolerance,
                                                       scan.has_storage)
                    if condition is not None:
                        predicted = resonance_condition(
                            *condition, omega_s if condition[1] else 0.0, omega_b)
                resonances.append(Resonance(
                    omega_p=location,
                    epsilon_p=float(epsilon),
                    min_gap=min_gap,
                    classification=classify_condition(condition),
                    condition=condition,
                    partner=partner,
                    predicted_omega_p=predicted,
                    indices=list(cluster),
                ))
        for resonance in resonances:
            logger.debug("Resonance at %.4f GHz: %s %s", resonance.omega_p,
                         resonance.classification, resonance.condition)
        return ResonanceReport(resonances)

    @staticmethod
    def _neighbour_indices(size: int, cluster: List[int], flagged: set) -> List[int]:
        # Nearest clean points on each side of the cluster
        picks = []
        for start, direction in ((cluster[0] - 1, -1), (cluster[-1] + 1, 1)):
            index = start
            while 0 <= index < size and index in flagged:
                index += direction
            if 0 <= index < size:
                picks.append(index)
        return picks or list(cluster)


# Convenience functions
def stark_scan(static: StaticSystem, omega_p_grid: Sequence[float],
               epsilon_p_list: Sequence[float],
               cutoff: int = FLOQUET_SETTINGS['cutoff']) -> StarkScan:
    """Stark-shifted frequencies over a pump-frequency grid."""
    return FloquetAnalyzer(cutoff).stark_scan(static, omega_p_grid, epsilon_p_list)


def find_resonances(scan: StarkScan,
                    gap_threshold: float = FLOQUET_SETTINGS['gap_threshold']) -> ResonanceReport:
    """Cluster and classify resonance features of a Stark scan."""
    return FloquetAnalyzer().find_resonances(scan, gap_threshold)


# Export all Floquet classes and functions
__all__ = [
    'DESIRED_CONDITION',
    'PumpMode',
    'StaticSystem',
    'FloquetSystem',
    'StarkScan',
    'Resonance',
    'ResonanceReport',
    'FloquetAnalyzer',
    'pump_operators',
    'buffer_system',
    'storage_buffer_system',
    'build_floquet',
    'resonance_condition',
    'classify_condition',
    'stark_scan',
    'find_resonances',
]
