"""
Lindblad master-equation engine for catqubit-tools.

This module provides dissipators and Liouvillians, time evolution under
static or piecewise-constant generators, steady states, and
symmetry-filtered extraction of slow Liouvillian decay rates.
"""

import functools
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg
from scipy.integrate import solve_ivp

from ..utils.constants import (
    DEFAULT_ATOL,
    DEFAULT_RTOL,
    DENSITY_HERMITIAN_TOL,
    ERROR_MESSAGES,
    MIN_EIGENVALUE_FLOOR,
    SPECTRAL_SETTINGS,
    TRACE_DRIFT_FACTOR,
)
from ..utils.validation import (
    IntegrationError,
    SpectralError,
    StiffnessError,
    ValidationError,
    validate_positive,
    validate_rate,
    validate_time_grid,
)
from .fock import CompositeSpace, DensityMatrix, Ket, Operator, as_density_matrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Dissipator:
    """Lindblad term rate * D[jump]."""

    rate: float
    jump: Operator

    def __post_init__(self):
        object.__setattr__(self, 'rate', validate_rate(self.rate, 'dissipator.rate'))

    @property
    def scaled_jump(self) -> np.ndarray:
        return np.sqrt(self.rate) * self.jump.matrix


@dataclass(frozen=True, eq=False)
class Liouvillian:
    """Generator drho/dt = -i[H, rho] + sum_k D_k[rho]."""

    hamiltonian: Operator
    dissipators: Tuple[Dissipator, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'dissipators', tuple(self.dissipators))
        matrix = self.hamiltonian.matrix
        scale = max(1.0, float(np.max(np.abs(matrix))))
        if np.max(np.abs(matrix - matrix.conj().T)) > DENSITY_HERMITIAN_TOL * scale:
            raise ValidationError("Liouvillian Hamiltonian is not hermitian", 'hamiltonian')
        for dissipator in self.dissipators:
            if dissipator.jump.space.dims != self.space.dims:
                raise ValidationError(
                    ERROR_MESSAGES['space_mismatch'].format(
                        left=dissipator.jump.space.dims, right=self.space.dims
                    ),
                    'dissipators',
                )

    @property
    def space(self) -> CompositeSpace:
        return self.hamiltonian.space

    @property
    def dim(self) -> int:
        return self.space.total_dim

    def effective_hamiltonian(self) -> np.ndarray:
        """Non-hermitian H - (i/2) sum_k rate_k L_k^dag L_k."""
        heff = np.array(self.hamiltonian.matrix, dtype=complex)
        for dissipator in self.dissipators:
            jump = dissipator.scaled_jump
            heff = heff - 0.5j * (jump.conj().T @ jump)
        return heff

    def apply(self, rho: Union[DensityMatrix, np.ndarray]) -> np.ndarray:
        """Generator applied to a density matrix."""
        matrix = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
        heff = self.effective_hamiltonian()
        out = -1j * (heff @ matrix - matrix @ heff.conj().T)
        for dissipator in self.dissipators:
            jump = dissipator.scaled_jump
            out = out + jump @ matrix @ jump.conj().T
        return out

    def superoperator(self) -> sp.csr_matrix:
        """
        Row-major vectorized generator, vec(A rho B) = (A kron B^T) vec(rho).

        Returns:
            Sparse (d^2 x d^2) matrix
        """
        dim = self.dim
        eye = sp.identity(dim, dtype=complex, format='csr')
        heff = sp.csr_matrix(self.effective_hamiltonian())
        matrix = (-1j * sp.kron(heff, eye, format='csr')
                  + 1j * sp.kron(eye, heff.conj(), format='csr'))
        for dissipator in self.dissipators:
            jump = sp.csr_matrix(dissipator.scaled_jump)
            matrix = matrix + sp.kron(jump, jump.conj(), format='csr')
        return matrix.tocsr()

    def replace_hamiltonian(self, hamiltonian: Operator) -> 'Liouvillian':
        return Liouvillian(hamiltonian, self.dissipators)


@dataclass(frozen=True, eq=False)
class Schedule:
    """Piecewise-constant generator: ordered (duration, Liouvillian) segments."""

    segments: Tuple[Tuple[float, Liouvillian], ...]

    def __post_init__(self):
        segments = tuple((float(duration), generator) for duration, generator in self.segments)
        if not segments:
            raise ValidationError("Schedule needs at least one segment", 'segments')
        dims = segments[0][1].space.dims
        for duration, generator in segments:
            validate_positive(duration, 'segment duration')
            if generator.space.dims != dims:
                raise ValidationError("All schedule segments must share one space", 'segments')
        object.__setattr__(self, 'segments', segments)

    @property
    def space(self) -> CompositeSpace:
        return self.segments[0][1].space

    @property
    def duration(self) -> float:
        return float(sum(duration for duration, _ in self.segments))

    def boundaries(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum([duration for duration, _ in self.segments])])


Generator = Union[Liouvillian, Schedule]


@dataclass
class EvolutionResult:
    """Output of a master-equation integration."""

    times: np.ndarray
    states: Optional[np.ndarray]
    expectations: Dict[str, np.ndarray]
    statistics: Dict[str, float] = field(default_factory=dict)
    space: Optional[CompositeSpace] = None

    def state(self, index: int) -> DensityMatrix:
        """Density matrix at output index (hermitized, renormalized)."""
        if self.states is None:
            raise ValidationError("States were not stored for this run", 'states')
        return DensityMatrix.from_array(self.space, self.states[index])

    @property
    def final_state(self) -> DensityMatrix:
        return self.state(-1)


@dataclass
class SteadySubspace:
    """Orthonormal hermitian basis of a degenerate steady operator space."""

    basis: Tuple[np.ndarray, ...]
    singular_values: np.ndarray
    space: CompositeSpace

    @property
    def dimension(self) -> int:
        return len(self.basis)


@dataclass
class DecayRate:
    """Symmetry-filtered slow mode of a generator."""

    rate: float
    eigenvalue: complex
    eigenoperator: np.ndarray
    participation: float
    candidates: int = 0


def apply_dissipator(dissipator: Dissipator, rho: Union[DensityMatrix, np.ndarray]) -> np.ndarray:
    """
    Apply rate * (L rho L^dag - 1/2 {L^dag L, rho}).

    Args:
        dissipator: Lindblad term
        rho: Density matrix (or raw matrix)

    Returns:
        Traceless derivative matrix

    Raises:
        ValidationError: On dimension mismatch
    """
    if isinstance(rho, DensityMatrix):
        if rho.space.dims != dissipator.jump.space.dims:
            raise ValidationError(
                ERROR_MESSAGES['space_mismatch'].format(
                    left=dissipator.jump.space.dims, right=rho.space.dims
                ),
                'rho',
            )
        matrix = rho.matrix
    else:
        matrix = np.asarray(rho, dtype=complex)
        if matrix.shape != dissipator.jump.matrix.shape:
            raise ValidationError(
                ERROR_MESSAGES['space_mismatch'].format(
                    left=dissipator.jump.matrix.shape, right=matrix.shape
                ),
                'rho',
            )
    jump = dissipator.jump.matrix
    product = jump.conj().T @ jump
    return dissipator.rate * (
        jump @ matrix @ jump.conj().T - 0.5 * (product @ matrix + matrix @ product)
    )


def _sector_indices(parity: Operator, sector: str) -> np.ndarray:
    # Vectorized index k = i*d + j belongs to the sector by the sign p_i p_j.
    signs = np.real(np.diag(parity.matrix))
    if not np.allclose(parity.matrix, np.diag(np.diag(parity.matrix))) or not np.allclose(
        np.abs(signs), 1.0
    ):
        raise ValidationError("Parity operator must be diagonal with entries +/-1", 'parity')
    products = np.outer(signs, signs).ravel()
    if sector == 'even':
        return np.flatnonzero(products > 0)
    return np.flatnonzero(products < 0)


def _observable_sector(observable: Operator, parity: Operator) -> str:
    conjugated = parity.matrix @ observable.matrix @ parity.matrix
    if np.allclose(conjugated, observable.matrix, atol=1e-10):
        return 'even'
    if np.allclose(conjugated, -observable.matrix, atol=1e-10):
        return 'odd'
    raise ValidationError("Observable has no definite parity symmetry", 'observable')


class MasterEquationSolver:
    """Adaptive Runge-Kutta integrator and spectral tools for Liouvillians."""

    def __init__(self, rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
                 store_states: bool = True):
        """
        Initialize master-equation solver.

        Args:
            rtol: Relative local error tolerance
            atol: Absolute local error tolerance
            store_states: Keep the density matrix at every output time
        """
        self.rtol = validate_positive(rtol, 'rtol')
        self.atol = validate_positive(atol, 'atol')
        self.store_states = store_states

    def evolve(self, generator: Generator, rho0: Union[Ket, DensityMatrix],
               t_grid: Sequence[float],
               observables: Optional[Dict[str, Operator]] = None) -> EvolutionResult:
        """
        Integrate the master equation and sample it on a time grid.

        The first grid time is the time of rho0. Schedules integrate
        segment by segment with the state handed from one to the next.

        Args:
            generator: Liouvillian or Schedule
            rho0: Initial state
            t_grid: Strictly increasing output times
            observables: Named operators whose expectations are recorded

        Returns:
            EvolutionResult with states, expectation traces and statistics

        Raises:
            ValidationError: On invalid inputs
            StiffnessError: If the step size underflows
            IntegrationError: If integration fails or the trace drifts
        """
        rho = as_density_matrix(rho0)
        times = validate_time_grid(t_grid)
        if rho.space.dims != generator.space.dims:
            raise ValidationError(
                ERROR_MESSAGES['space_mismatch'].format(
                    left=rho.space.dims, right=generator.space.dims
                ),
                'rho0',
            )
        observables = observables or {}
        for name, operator in observables.items():
            if operator.space.dims != rho.space.dims:
                raise ValidationError(f"Observable {name} lives on another space", name)

        try:
            if isinstance(generator, Schedule):
                samples, counters = self._evolve_schedule(generator, rho.matrix, times)
            else:
                samples, counters = self._integrate(generator, rho.matrix, times)
        except (IntegrationError, ValidationError):
            raise
        except Exception as e:
            raise IntegrationError(
                ERROR_MESSAGES['integration_failed'].format(message=e)
            ) from e

        return self._collect(times, samples, observables, counters, rho.space)

    def _integrate(self, generator: Liouvillian, rho0: np.ndarray,
                   times: np.ndarray) -> Tuple[np.ndarray, Dict[str, int]]:
        dim = generator.dim
        heff = generator.effective_hamiltonian()
        heff_dag = heff.conj().T
        jumps = [(d.scaled_jump, d.scaled_jump.conj().T) for d in generator.dissipators
                 if d.rate > 0]

        def rhs(_t, y):
            rho = y.reshape(dim, dim)
            out = -1j * (heff @ rho - rho @ heff_dag)
            for jump, jump_dag in jumps:
                out += jump @ rho @ jump_dag
            return out.ravel()

        if times.size == 1:
            return rho0.reshape(1, dim, dim).copy(), {'nfev': 0, 'steps': 0}

        solution = solve_ivp(
            rhs, (times[0], times[-1]), rho0.astype(complex).ravel(), method='RK45',
            t_eval=times, rtol=self.rtol, atol=self.atol,
        )
        if solution.status != 0:
            message = solution.message or 'unknown failure'
            if 'step size' in message.lower():
                last = float(solution.t[-1]) if solution.t.size else float(times[0])
                raise StiffnessError(ERROR_MESSAGES['stiff'].format(time=last, message=message))
            raise IntegrationError(ERROR_MESSAGES['integration_failed'].format(message=message))
        samples = solution.y.T.reshape(times.size, dim, dim)
        return samples, {'nfev': int(solution.nfev), 'steps': int(solution.nfev // 6)}

    def _evolve_schedule(self, schedule: Schedule, rho0: np.ndarray,
                         times: np.ndarray) -> Tuple[np.ndarray, Dict[str, int]]:
        bounds = schedule.boundaries() + times[0]
        if times[-1] > bounds[-1] * (1 + 1e-12) + 1e-12:
            raise ValidationError(
                f"Output time {times[-1]:g} exceeds schedule duration {schedule.duration:g}",
                't_grid',
            )
        dim = schedule.space.total_dim
        samples = np.empty((times.size, dim, dim), dtype=complex)
        samples[0] = rho0
        counters = {'nfev': 0, 'steps': 0}
        current = rho0.astype(complex)
        for index, (_, generator) in enumerate(schedule.segments):
            start, stop = bounds[index], bounds[index + 1]
            if start >= times[-1]:
                break
            inside = np.flatnonzero((times > start) & (times <= stop))
            stop = min(stop, times[-1])
            grid = np.unique(np.concatenate([[start], times[inside], [stop]]))
            segment, used = self._integrate(generator, current, grid)
            counters['nfev'] += used['nfev']
            counters['steps'] += used['steps']
            positions = np.searchsorted(grid, times[inside])
            samples[inside] = segment[positions]
            current = segment[-1]
        return samples, counters

    def _collect(self, times: np.ndarray, samples: np.ndarray,
                 observables: Dict[str, Operator], counters: Dict[str, int],
                 space: CompositeSpace) -> EvolutionResult:
        traces = np.real(np.einsum('tii->t', samples))
        drift = float(np.max(np.abs(traces - 1.0)))
        hermiticity = float(np.max(np.abs(samples - np.conj(np.transpose(samples, (0, 2, 1))))))
        limit = TRACE_DRIFT_FACTOR * self.rtol
        if drift > limit:
            raise IntegrationError(ERROR_MESSAGES['trace_drift'].format(drift=drift, limit=limit))
        min_eigenvalue = float('inf')
        for sample in samples:
            hermitian = 0.5 * (sample + sample.conj().T)
            min_eigenvalue = min(min_eigenvalue, float(scipy.linalg.eigvalsh(hermitian)[0]))
        if min_eigenvalue < MIN_EIGENVALUE_FLOOR:
            logger.warning("Negative state eigenvalue %.3g during evolution", min_eigenvalue)
        if hermiticity > limit:
            logger.warning("Hermiticity drift %.3g exceeds %.3g", hermiticity, limit)

        expectations = {
            name: np.real(np.einsum('ij,tji->t', operator.matrix, samples))
            if operator.hermitian else np.einsum('ij,tji->t', operator.matrix, samples)
            for name, operator in observables.items()
        }
        statistics = {
            'steps': counters['steps'],
            'nfev': counters['nfev'],
            'max_trace_drift': drift,
            'max_hermiticity_drift': hermiticity,
            'min_eigenvalue': min_eigenvalue,
        }
        logger.debug("Evolution finished: %s", statistics)
        return EvolutionResult(
            times=times,
            states=samples if self.store_states else None,
            expectations=expectations,
            statistics=statistics,
            space=space,
        )

    def steady_state(self, liouvillian: Liouvillian, parity: Optional[Operator] = None,
                     tol: float = SPECTRAL_SETTINGS['null_space_tol']
                     ) -> Union[DensityMatrix, SteadySubspace]:
        """
        Null space of the vectorized generator, hermitized and normalized.

        Args:
            liouvillian: Static generator
            parity: Optional diagonal symmetry operator; restricts the search
                to operators commuting with it
            tol: Null-space threshold relative to the largest singular value

        Returns:
            DensityMatrix if the steady state is unique, otherwise a
            SteadySubspace with an orthonormal hermitian basis

        Raises:
            SpectralError: If no null vector is found or the solve fails
        """
        superop = liouvillian.superoperator()
        dim = liouvillian.dim
        indices = (np.arange(dim * dim) if parity is None
                   else _sector_indices(parity, 'even'))
        reduced = superop[indices][:, indices]
        try:
            if reduced.shape[0] <= SPECTRAL_SETTINGS['dense_limit']:
                vectors, singular = self._dense_null_space(reduced.toarray(), tol)
            else:
                vectors, singular = self._sparse_null_space(reduced.tocsc(), tol)
        except SpectralError:
            raise
        except Exception as e:
            raise SpectralError(ERROR_MESSAGES['spectral_failure'].format(error=e)) from e

        operators = []
        for vector in vectors:
            full = np.zeros(dim * dim, dtype=complex)
            full[indices] = vector
            operators.append(full.reshape(dim, dim))
        basis = _hermitian_basis(operators)

        if len(basis) == 1:
            matrix = basis[0]
            trace = np.trace(matrix).real
            if abs(trace) < 1e-12:
                raise SpectralError("Steady operator is traceless; cannot normalize")
            state = DensityMatrix.from_array(liouvillian.space, matrix / trace)
            residual = float(np.max(np.abs(liouvillian.apply(state.matrix))))
            logger.debug("Steady-state residual %.3g", residual)
            return state
        logger.info("Degenerate steady space of dimension %d", len(basis))
        return SteadySubspace(tuple(basis), np.asarray(singular), liouvillian.space)

    @staticmethod
    def _dense_null_space(matrix: np.ndarray, tol: float) -> Tuple[List[np.ndarray], np.ndarray]:
        _, singular, vh = scipy.linalg.svd(matrix)
        threshold = tol * singular[0] if singular[0] > 0 else tol
        null = np.flatnonzero(singular <= threshold)
        if null.size == 0:
            raise SpectralError(
                ERROR_MESSAGES['no_null_vector'].format(tol=tol, smallest=singular[-1])
            )
        # Smallest singular value first.
        order = null[np.argsort(singular[null])]
        return [vh[index].conj() for index in order], singular[order]

    @staticmethod
    def _sparse_null_space(matrix: sp.csc_matrix, tol: float
                           ) -> Tuple[List[np.ndarray], np.ndarray]:
        scale = float(scipy.sparse.linalg.norm(matrix, 1))
        count = min(SPECTRAL_SETTINGS['sparse_eigenvalues'], matrix.shape[0] - 2)
        # Shift slightly off zero so the shift-invert factorization stays regular.
        values, vectors = scipy.sparse.linalg.eigs(
            matrix, k=count, sigma=-1e-7 * scale, which='LM'
        )
        magnitudes = np.abs(values)
        null = np.flatnonzero(magnitudes <= tol * scale)
        if null.size == 0:
            raise SpectralError(
                ERROR_MESSAGES['no_null_vector'].format(tol=tol, smallest=magnitudes.min())
            )
        order = null[np.argsort(magnitudes[null])]
        return [vectors[:, index] for index in order], magnitudes[order]

    def spectrum(self, liouvillian: Liouvillian) -> np.ndarray:
        """All eigenvalues of the vectorized generator (dense)."""
        return scipy.linalg.eigvals(liouvillian.superoperator().toarray())

    def slowest_decay_rate(self, generator: Generator, observable: Operator,
                           parity: Optional[Operator] = None,
                           floor: float = SPECTRAL_SETTINGS['participation_floor']
                           ) -> DecayRate:
        """
        Slowest decay rate among modes carrying the observable.

        Modes are weighted by their share of the observable in the
        left/right eigen-decomposition; clusters of equal |Re lambda| are
        pooled. For a Schedule the one-period propagator is used and
        rates are -ln|mu| / period.

        Args:
            generator: Liouvillian or Schedule (one period)
            observable: Symmetry observable (e.g. the Z-like population difference)
            parity: Optional diagonal symmetry; the search is restricted to the
                sector the observable belongs to
            floor: Minimum participation of a mode cluster

        Returns:
            DecayRate with eigenvalue, eigenoperator and participation

        Raises:
            SpectralError: If the eigensolve fails or no mode passes the filter
        """
        dim = generator.space.total_dim
        if observable.space.dims != generator.space.dims:
            raise ValidationError("Observable lives on another space", 'observable')
        if parity is None:
            indices = np.arange(dim * dim)
        else:
            indices = _sector_indices(parity, _observable_sector(observable, parity))

        try:
            if isinstance(generator, Schedule):
                propagator = np.eye(indices.size, dtype=complex)
                for duration, segment in generator.segments:
                    block = segment.superoperator()[indices][:, indices].toarray()
                    propagator = scipy.linalg.expm(block * duration) @ propagator
                values, left, right = scipy.linalg.eig(propagator, left=True, right=True)
                with np.errstate(divide='ignore'):
                    rates = -np.log(np.abs(values)) / generator.duration
                eigenvalues = np.log(values.astype(complex)) / generator.duration
            else:
                block = generator.superoperator()[indices][:, indices].toarray()
                eigenvalues, left, right = scipy.linalg.eig(block, left=True, right=True)
                rates = -eigenvalues.real
        except Exception as e:
            raise SpectralError(ERROR_MESSAGES['spectral_failure'].format(error=e)) from e

        if np.max(eigenvalues.real) > 1e-9 * max(1.0, np.max(np.abs(eigenvalues))):
            logger.warning("Generator has eigenvalues with positive real part %.3g",
                           np.max(eigenvalues.real))

        # Heisenberg-picture row vector: <O> = sum_ij O_ji rho_ij = vec(O^T) . vec(rho)
        row = observable.matrix.T.ravel()[indices]
        norm_sq = float(np.real(np.vdot(row, row)))
        if norm_sq == 0:
            raise ValidationError("Observable vanishes in the selected sector", 'observable')

        clusters = _cluster_rates(np.abs(rates))
        passing = []
        for members in clusters:
            weight = _cluster_weight(row, left[:, members], right[:, members]) / norm_sq
            if weight >= floor:
                passing.append((float(np.mean(np.abs(rates[members]))), members, weight))
        if not passing:
            raise SpectralError(ERROR_MESSAGES['no_participating_mode'].format(floor=floor))

        rate, members, weight = min(passing, key=lambda item: item[0])
        single = [abs(np.dot(row, right[:, k])) / max(np.linalg.norm(right[:, k]), 1e-300)
                  for k in members]
        best = members[int(np.argmax(single))]
        operator = np.zeros(dim * dim, dtype=complex)
        operator[indices] = right[:, best]
        logger.debug("Slowest participating mode: rate=%.6g participation=%.4f", rate, weight)
        return DecayRate(
            rate=rate,
            eigenvalue=complex(eigenvalues[best]),
            eigenoperator=operator.reshape(dim, dim),
            participation=float(weight),
            candidates=len(passing),
        )


def population_generator(liouvillian: Liouvillian, tol: float = 1e-12) -> np.ndarray:
    """
    Classical rate matrix for the diagonal of rho.

    Valid when the Hamiltonian is diagonal and every jump operator maps
    basis states to basis states; populations then evolve on their own as
    dp/dt = W p.

    Args:
        liouvillian: Generator with population-closed dynamics
        tol: Threshold for structural zeros

    Returns:
        Rate matrix W (columns sum to zero)

    Raises:
        ValidationError: If populations couple to coherences
    """
    hamiltonian = liouvillian.hamiltonian.matrix
    if np.max(np.abs(hamiltonian - np.diag(np.diag(hamiltonian))), initial=0.0) > tol:
        raise ValidationError("Hamiltonian is not diagonal; populations are not closed",
                              'hamiltonian')
    dim = liouvillian.dim
    rates = np.zeros((dim, dim))
    for dissipator in liouvillian.dissipators:
        jump = dissipator.scaled_jump
        weights = np.abs(jump) ** 2
        structural = weights > tol * max(1.0, weights.max())
        if (np.any(np.count_nonzero(structural, axis=0) > 1)
                or np.any(np.count_nonzero(structural, axis=1) > 1)):
            raise ValidationError("Jump operator mixes basis states", 'dissipators')
        rates += weights
    rates -= np.diag(rates.sum(axis=0))
    return rates


def _hermitian_basis(operators: List[np.ndarray]) -> List[np.ndarray]:
    # Hermitian parts (M + M^dag)/2 and i(M - M^dag)/2, orthonormalized over the reals.
    if len(operators) == 1:
        matrix = operators[0]
        # Fix the global phase so the hermitian part carries the trace.
        trace = np.trace(matrix)
        if abs(trace) > 1e-12:
            matrix = matrix * (abs(trace) / trace)
        return [0.5 * (matrix + matrix.conj().T)]
    candidates = []
    for matrix in operators:
        candidates.append(0.5 * (matrix + matrix.conj().T))
        candidates.append(0.5j * (matrix - matrix.conj().T))
    stacked = np.array([np.concatenate([c.real.ravel(), c.imag.ravel()]) for c in candidates])
    _, singular, vh = scipy.linalg.svd(stacked, full_matrices=False)
    rank = len(operators)
    shape = operators[0].shape
    size = shape[0] * shape[1]
    basis = []
    for row in vh[:rank]:
        matrix = (row[:size] + 1j * row[size:]).reshape(shape)
        basis.append(0.5 * (matrix + matrix.conj().T))
    return basis


def _cluster_rates(rates: np.ndarray) -> List[np.ndarray]:
    order = np.argsort(rates)
    clusters: List[List[int]] = []
    rtol = SPECTRAL_SETTINGS['cluster_rtol']
    atol = SPECTRAL_SETTINGS['cluster_atol'] * max(1.0, float(np.max(rates[np.isfinite(rates)])))
    for index in order:
        if clusters and abs(rates[index] - rates[clusters[-1][-1]]) <= atol + rtol * rates[index]:
            clusters[-1].append(int(index))
        else:
            clusters.append([int(index)])
    return [np.asarray(cluster) for cluster in clusters]


def _cluster_weight(row: np.ndarray, left: np.ndarray, right: np.ndarray) -> float:
    # Share of |O|^2 carried by the spectral projector R (L^H R)^-1 L^H of the cluster.
    gram = left.conj().T @ right
    try:
        coefficients = scipy.linalg.solve(gram, left.conj().T @ row.conj())
    except scipy.linalg.LinAlgError:
        coefficients = scipy.linalg.lstsq(gram, left.conj().T @ row.conj())[0]
    return float(np.real((row @ right) @ coefficients))


@functools.lru_cache(maxsize=None)
def default_solver() -> MasterEquationSolver:
    """Shared solver with default tolerances."""
    return MasterEquationSolver()


def evolve(generator: Generator, rho0: Union[Ket, DensityMatrix], t_grid: Sequence[float],
           tol: float = DEFAULT_RTOL,
           observables: Optional[Dict[str, Operator]] = None) -> EvolutionResult:
    """
    Convenience function to integrate the master equation.

    Args:
        generator: Liouvillian or Schedule
        rho0: Initial state
        t_grid: Output times
        tol: Relative tolerance (absolute tolerance is tol/100)
        observables: Named operators to record

    Returns:
        EvolutionResult
    """
    solver = MasterEquationSolver(rtol=tol, atol=tol * 1e-2)
    return solver.evolve(generator, rho0, t_grid, observables)


def steady_state(liouvillian: Liouvillian, parity: Optional[Operator] = None
                 ) -> Union[DensityMatrix, SteadySubspace]:
    """Convenience function for MasterEquationSolver.steady_state."""
    return default_solver().steady_state(liouvillian, parity)


def slowest_decay_rate(generator: Generator, observable: Operator,
                       parity: Optional[Operator] = None) -> DecayRate:
    """Convenience function for MasterEquationSolver.slowest_decay_rate."""
    return default_solver().slowest_decay_rate(generator, observable, parity)


# Export all dynamics classes and functions
__all__ = [
    'Dissipator',
    'Liouvillian',
    'Schedule',
    'Generator',
    'EvolutionResult',
    'SteadySubspace',
    'DecayRate',
    'MasterEquationSolver',
    'apply_dissipator',
    'population_generator',
    'default_solver',
    'evolve',
    'steady_state',
    'slowest_decay_rate',
]
