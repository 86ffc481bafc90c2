"""
Truncated Fock-space algebra for catqubit-tools.

This module provides truncated bosonic spaces, operators and states
(kets and density matrices), displacements, coherent and cat states,
the Wigner function, tensor products and partial traces.
"""

import functools
import logging
from dataclasses import InitVar, dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
from scipy.special import gammaln

from ..utils.constants import (
    DENSITY_HERMITIAN_TOL,
    ERROR_MESSAGES,
    OPERATOR_HERMITIAN_TOL,
    STATE_NORM_TOL,
)
from ..utils.validation import ValidationError, validate_dimension, validate_guard

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FockSpace:
    """A single truncated bosonic mode with basis |0>..|dim-1>."""

    dim: int
    label: str = 'mode'

    def __post_init__(self):
        validate_dimension(self.dim, minimum=2, field=f'{self.label}.dim')


@dataclass(frozen=True)
class CompositeSpace:
    """Ordered tensor product of truncated modes."""

    factors: Tuple[FockSpace, ...]

    def __post_init__(self):
        if not self.factors:
            raise ValidationError("Composite space needs at least one factor", 'factors')
        object.__setattr__(self, 'factors', tuple(self.factors))

    @classmethod
    def of(cls, *spaces: Union['FockSpace', 'CompositeSpace']) -> 'CompositeSpace':
        factors: List[FockSpace] = []
        for space in spaces:
            factors.extend(as_composite(space).factors)
        return cls(tuple(factors))

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(factor.dim for factor in self.factors)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(factor.label for factor in self.factors)

    def index(self, which: Union[int, str]) -> int:
        """Position of a factor given by index or label."""
        if isinstance(which, str):
            if which not in self.labels:
                raise ValidationError(f"No factor labelled '{which}' in {self.labels}", 'factor')
            return self.labels.index(which)
        if not 0 <= which < len(self.factors):
            raise ValidationError(f"Factor index {which} out of range", 'factor')
        return int(which)


SpaceLike = Union[FockSpace, CompositeSpace]


def as_composite(space: SpaceLike) -> CompositeSpace:
    """Promote a single mode to a one-factor composite space."""
    if isinstance(space, CompositeSpace):
        return space
    if isinstance(space, FockSpace):
        return CompositeSpace((space,))
    raise ValidationError(f"Not a space: {space!r}", 'space')


def _readonly(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex, copy=True)
    array.setflags(write=False)
    return array


def _check_same_space(left: CompositeSpace, right: CompositeSpace):
    if left.dims != right.dims:
        raise ValidationError(
            ERROR_MESSAGES['space_mismatch'].format(left=left.dims, right=right.dims), 'space'
        )


@dataclass(frozen=True, eq=False)
class Operator:
    """Linear map on a (composite) truncated space."""

    space: CompositeSpace
    matrix: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        object.__setattr__(self, 'space', as_composite(self.space))
        matrix = _readonly(self.matrix)
        n = self.space.total_dim
        if matrix.shape != (n, n):
            raise ValidationError(
                f"Operator shape {matrix.shape} does not match space dimension {n}", 'matrix'
            )
        if self.hermitian:
            scale = max(1.0, float(np.max(np.abs(matrix)))) if matrix.size else 1.0
            if np.max(np.abs(matrix - matrix.conj().T)) > OPERATOR_HERMITIAN_TOL * scale:
                raise ValidationError(
                    ERROR_MESSAGES['not_hermitian'].format(tol=OPERATOR_HERMITIAN_TOL), 'matrix'
                )
        object.__setattr__(self, 'matrix', matrix)

    def dag(self) -> 'Operator':
        return Operator(self.space, self.matrix.conj().T, self.hermitian)

    def is_hermitian(self, tol: float = OPERATOR_HERMITIAN_TOL) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T)) <= tol)

    def __matmul__(self, other: 'Operator') -> 'Operator':
        _check_same_space(self.space, other.space)
        return Operator(self.space, self.matrix @ other.matrix)

    def __add__(self, other: 'Operator') -> 'Operator':
        _check_same_space(self.space, other.space)
        return Operator(self.space, self.matrix + other.matrix,
                        self.hermitian and other.hermitian)

    def __sub__(self, other: 'Operator') -> 'Operator':
        _check_same_space(self.space, other.space)
        return Operator(self.space, self.matrix - other.matrix,
                        self.hermitian and other.hermitian)

    def __mul__(self, scalar: complex) -> 'Operator':
        scalar = complex(scalar)
        return Operator(self.space, scalar * self.matrix,
                        self.hermitian and scalar.imag == 0)

    __rmul__ = __mul__

    def __neg__(self) -> 'Operator':
        return Operator(self.space, -self.matrix, self.hermitian)


@dataclass(frozen=True, eq=False)
class Ket:
    """Normalized pure state."""

    space: CompositeSpace
    amplitudes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'space', as_composite(self.space))
        vector = _readonly(np.asarray(self.amplitudes).ravel())
        if vector.size != self.space.total_dim:
            raise ValidationError(
                f"Ket length {vector.size} does not match space dimension {self.space.total_dim}",
                'amplitudes',
            )
        norm = float(np.linalg.norm(vector))
        if abs(norm - 1.0) > STATE_NORM_TOL:
            raise ValidationError(ERROR_MESSAGES['bad_norm'].format(norm=norm), 'amplitudes')
        object.__setattr__(self, 'amplitudes', vector)

    def to_dm(self) -> 'DensityMatrix':
        return ket_to_dm(self)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace state. Pass validate=False for raw solver output."""

    space: CompositeSpace
    matrix: np.ndarray
    validate: InitVar[bool] = True

    def __post_init__(self, validate: bool):
        object.__setattr__(self, 'space', as_composite(self.space))
        matrix = _readonly(self.matrix)
        n = self.space.total_dim
        if matrix.shape != (n, n):
            raise ValidationError(
                f"Density matrix shape {matrix.shape} does not match dimension {n}", 'matrix'
            )
        if validate:
            trace = complex(np.trace(matrix))
            if abs(trace - 1.0) > DENSITY_HERMITIAN_TOL:
                raise ValidationError(ERROR_MESSAGES['bad_trace'].format(trace=trace.real),
                                      'matrix')
            if np.max(np.abs(matrix - matrix.conj().T)) > DENSITY_HERMITIAN_TOL:
                raise ValidationError(
                    ERROR_MESSAGES['not_hermitian'].format(tol=DENSITY_HERMITIAN_TOL), 'matrix'
                )
        object.__setattr__(self, 'matrix', matrix)

    @classmethod
    def from_array(cls, space: SpaceLike, matrix: np.ndarray) -> 'DensityMatrix':
        """Hermitize and renormalize a nearly valid density matrix."""
        matrix = np.asarray(matrix, dtype=complex)
        matrix = 0.5 * (matrix + matrix.conj().T)
        trace = np.trace(matrix).real
        if abs(trace) < 1e-300:
            raise ValidationError("Cannot normalize a traceless matrix", 'matrix')
        return cls(space, matrix / trace)

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


State = Union[Ket, DensityMatrix]


def _single_dim(space: SpaceLike) -> int:
    composite = as_composite(space)
    if len(composite.factors) != 1:
        raise ValidationError("Operation needs a single-mode space", 'space')
    return composite.dims[0]


def annihilation(space: SpaceLike) -> Operator:
    """Lowering operator a with <n-1|a|n> = sqrt(n)."""
    dim = _single_dim(space)
    return Operator(space, np.diag(np.sqrt(np.arange(1, dim)), k=1))


def creation(space: SpaceLike) -> Operator:
    """Raising operator a-dagger."""
    return annihilation(space).dag()


def number_operator(space: SpaceLike) -> Operator:
    dim = _single_dim(space)
    return Operator(space, np.diag(np.arange(dim, dtype=float)), hermitian=True)


def parity_operator(space: SpaceLike) -> Operator:
    """Photon-number parity (-1)^n."""
    dim = _single_dim(space)
    return Operator(space, np.diag((-1.0) ** np.arange(dim)), hermitian=True)


def identity(space: SpaceLike) -> Operator:
    composite = as_composite(space)
    return Operator(composite, np.eye(composite.total_dim), hermitian=True)


@functools.lru_cache(maxsize=32)
def _quadrature_eigensystem(dim: int) -> Tuple[np.ndarray, np.ndarray]:
    # Eigensystem of the hermitian generator i(a^dag - a); cached per truncation.
    lower = np.diag(np.sqrt(np.arange(1, dim)), k=1)
    generator = 1j * (lower.conj().T - lower)
    values, vectors = scipy.linalg.eigh(generator)
    values.setflags(write=False)
    vectors.setflags(write=False)
    return values, vectors


def displacement_matrix(dim: int, beta: complex) -> np.ndarray:
    """
    Truncated displacement D(beta) as a raw unitary matrix.

    D(beta) = R V diag(exp(-i |beta| w)) V^dag R^dag with R = exp(i theta n),
    where (w, V) diagonalize i(a^dag - a) and theta = arg(beta).

    Args:
        dim: Truncation dimension
        beta: Complex amplitude

    Returns:
        Unitary dim x dim array

    Raises:
        TruncationError: If |beta|^2 > dim/4
    """
    beta = validate_guard(beta, dim)
    values, vectors = _quadrature_eigensystem(dim)
    radius = abs(beta)
    theta = np.angle(beta) if radius > 0 else 0.0
    rotated = np.exp(1j * theta * np.arange(dim))[:, None] * vectors
    return (rotated * np.exp(-1j * radius * values)[None, :]) @ rotated.conj().T


def displacement(space: SpaceLike, beta: complex) -> Operator:
    """
    Displacement operator D(beta) = exp(beta a^dag - beta* a) on a single mode.

    Args:
        space: Single-mode space
        beta: Complex amplitude

    Returns:
        Unitary operator

    Raises:
        TruncationError: If |beta|^2 > dim/4
    """
    dim = _single_dim(space)
    return Operator(space, displacement_matrix(dim, beta))


def _parity_amplitudes(dim: int, alpha: complex, parity: Optional[int]) -> np.ndarray:
    # Coherent amplitudes alpha^n / sqrt(n!) in log space, optionally parity projected.
    n = np.arange(dim)
    radius = abs(alpha)
    if radius == 0.0:
        vector = np.zeros(dim, dtype=complex)
        vector[1 if parity == -1 else 0] = 1.0
        return vector
    log_magnitude = n * np.log(radius) - 0.5 * gammaln(n + 1)
    phases = np.exp(1j * n * np.angle(alpha))
    mask = np.ones(dim, dtype=bool)
    if parity == 1:
        mask = n % 2 == 0
    elif parity == -1:
        mask = n % 2 == 1
    log_magnitude = np.where(mask, log_magnitude, -np.inf)
    log_magnitude -= np.max(log_magnitude)
    vector = np.exp(log_magnitude) * phases
    return vector / np.linalg.norm(vector)


def coherent_state(space: SpaceLike, beta: complex) -> Ket:
    """
    Coherent state |beta>, truncated and renormalized.

    Args:
        space: Single-mode space
        beta: Complex amplitude

    Returns:
        Normalized ket

    Raises:
        TruncationError: If |beta|^2 > dim/4
    """
    dim = _single_dim(space)
    beta = validate_guard(beta, dim)
    return Ket(space, _parity_amplitudes(dim, beta, None))


def cat_state(space: SpaceLike, alpha: complex, parity: int) -> Ket:
    """
    Even (+1) or odd (-1) cat state proportional to |alpha> +/- |-alpha>.

    For alpha -> 0 the even cat tends to |0> and the odd cat to |1>.

    Args:
        space: Single-mode space
        alpha: Cat amplitude
        parity: +1 or -1

    Returns:
        Normalized ket

    Raises:
        ValidationError: If parity is not +/-1
        TruncationError: If |alpha|^2 > dim/4
    """
    if parity not in (1, -1):
        raise ValidationError(f"Parity must be +1 or -1, got {parity}", 'parity')
    dim = _single_dim(space)
    alpha = validate_guard(alpha, dim)
    return Ket(space, _parity_amplitudes(dim, alpha, parity))


def fock_state(space: SpaceLike, n: int) -> Ket:
    dim = _single_dim(space)
    if not 0 <= n < dim:
        raise ValidationError(f"Fock level {n} outside truncation {dim}", 'n')
    vector = np.zeros(dim, dtype=complex)
    vector[n] = 1.0
    return Ket(space, vector)


def ket_to_dm(ket: Ket) -> DensityMatrix:
    vector = ket.amplitudes
    return DensityMatrix(ket.space, np.outer(vector, vector.conj()))


def as_density_matrix(state: State) -> DensityMatrix:
    if isinstance(state, Ket):
        return ket_to_dm(state)
    if isinstance(state, DensityMatrix):
        return state
    raise ValidationError(f"Not a state: {state!r}", 'state')


def wigner(state: State, grid: Union[complex, Sequence[complex], np.ndarray]) -> np.ndarray:
    """
    Wigner function W(beta) = (2/pi) Tr[D(beta) P D(beta)^dag rho].

    Args:
        state: Single-mode ket or density matrix
        grid: Complex phase-space points (any shape)

    Returns:
        Real array with the shape of grid

    Raises:
        TruncationError: If a grid point violates |beta|^2 <= dim/4
    """
    rho = as_density_matrix(state).matrix
    dim = _single_dim(as_density_matrix(state).space)
    points = np.asarray(grid, dtype=complex)
    signs = (-1.0) ** np.arange(dim)
    values = np.empty(points.size, dtype=float)
    for index, beta in enumerate(points.ravel()):
        unitary = displacement_matrix(dim, beta)
        # Diagonal of D^dag rho D gives the photon distribution of the displaced state.
        populations = np.einsum('jn,jn->n', unitary.conj(), rho @ unitary)
        values[index] = (2.0 / np.pi) * float(np.real(np.dot(signs, populations)))
    return values.reshape(points.shape)


def phase_space_grid(x: Sequence[float], y: Sequence[float]) -> np.ndarray:
    """Complex grid beta = x + i y with shape (len(y), len(x))."""
    xx, yy = np.meshgrid(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    return xx + 1j * yy


def tensor(*items: Union[Operator, Ket, DensityMatrix]) -> Union[Operator, Ket, DensityMatrix]:
    """Kronecker product of operators or states, factors in argument order."""
    if not items:
        raise ValidationError("tensor needs at least one argument", 'items')
    kinds = {type(item) for item in items}
    if len(kinds) != 1:
        raise ValidationError("tensor arguments must all be of one kind", 'items')
    space = CompositeSpace.of(*(item.space for item in items))
    first = items[0]
    if isinstance(first, Ket):
        vector = functools.reduce(np.kron, [item.amplitudes for item in items])
        return Ket(space, vector)
    matrix = functools.reduce(np.kron, [item.matrix for item in items])
    if isinstance(first, DensityMatrix):
        return DensityMatrix(space, matrix)
    return Operator(space, matrix, all(item.hermitian for item in items))


def embed(operator: Operator, which: Union[int, str], space: CompositeSpace) -> Operator:
    """
    Lift a single-mode operator into a composite space.

    Args:
        operator: Operator on one factor
        which: Target factor index or label
        space: Composite space

    Returns:
        Operator acting as identity on the other factors
    """
    position = space.index(which)
    if operator.space.dims != (space.dims[position],):
        raise ValidationError(
            ERROR_MESSAGES['space_mismatch'].format(
                left=operator.space.dims, right=(space.dims[position],)
            ),
            'operator',
        )
    matrices = [np.eye(dim) for dim in space.dims]
    matrices[position] = operator.matrix
    return Operator(space, functools.reduce(np.kron, matrices), operator.hermitian)


def expect(operator: Operator, state: State) -> complex:
    """Expectation value Tr[O rho]."""
    _check_same_space(operator.space, state.space)
    if isinstance(state, Ket):
        vector = state.amplitudes
        return complex(np.vdot(vector, operator.matrix @ vector))
    return complex(np.trace(operator.matrix @ state.matrix))


def partial_trace(state: State, keep: Iterable[Union[int, str]]) -> DensityMatrix:
    """
    Reduced density matrix on the kept factors (in their original order).

    Args:
        state: State on a composite space
        keep: Factor indices or labels to keep

    Returns:
        Reduced density matrix
    """
    rho = as_density_matrix(state)
    space = rho.space
    kept = sorted({space.index(which) for which in keep})
    if not kept:
        raise ValidationError("partial_trace must keep at least one factor", 'keep')
    dims = space.dims
    count = len(dims)
    tensor_rho = rho.matrix.reshape(dims + dims)
    traced = [index for index in range(count) if index not in kept]
    # Trace pairs from the highest axis down so earlier axis numbers stay valid.
    current = count
    for index in sorted(traced, reverse=True):
        tensor_rho = np.trace(tensor_rho, axis1=index, axis2=index + current)
        current -= 1
    kept_dim = int(np.prod([dims[index] for index in kept]))
    reduced_space = CompositeSpace(tuple(space.factors[index] for index in kept))
    return DensityMatrix(reduced_space, tensor_rho.reshape(kept_dim, kept_dim), validate=False)


def pad(state: State, dim: int) -> DensityMatrix:
    """Embed a single-mode state into a larger truncation with zeros."""
    rho = as_density_matrix(state)
    old_dim = _single_dim(rho.space)
    if dim < old_dim:
        raise ValidationError(f"Cannot pad dimension {old_dim} down to {dim}", 'dim')
    padded = np.zeros((dim, dim), dtype=complex)
    padded[:old_dim, :old_dim] = rho.matrix
    label = rho.space.factors[0].label
    return DensityMatrix(FockSpace(dim, label), padded, validate=False)


def cat_manifold_projector(space: SpaceLike, alpha: complex) -> Operator:
    """Projector onto span{|alpha>, |-alpha>} built from the two parity cats."""
    even = cat_state(space, alpha, 1).amplitudes
    odd = cat_state(space, alpha, -1).amplitudes
    matrix = np.outer(even, even.conj()) + np.outer(odd, odd.conj())
    return Operator(space, matrix, hermitian=True)


def manifold_fidelity(state: State, alpha: complex) -> float:
    """Population inside the cat manifold, Tr[Pi rho]."""
    rho = as_density_matrix(state)
    projector = cat_manifold_projector(rho.space, alpha)
    return float(np.real(expect(projector, rho)))


def fidelity(first: State, second: State) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2."""
    rho = as_density_matrix(first)
    sigma = as_density_matrix(second)
    _check_same_space(rho.space, sigma.space)
    if isinstance(first, Ket):
        vector = first.amplitudes
        return float(np.real(np.vdot(vector, sigma.matrix @ vector)))
    root = scipy.linalg.sqrtm(rho.matrix)
    inner = scipy.linalg.sqrtm(root @ sigma.matrix @ root)
    return float(np.real(np.trace(inner)) ** 2)


# Export all Fock-space functions
__all__ = [
    'FockSpace',
    'CompositeSpace',
    'SpaceLike',
    'Operator',
    'Ket',
    'DensityMatrix',
    'State',
    'as_composite',
    'annihilation',
    'creation',
    'number_operator',
    'parity_operator',
    'identity',
    'displacement',
    'displacement_matrix',
    'coherent_state',
    'cat_state',
    'fock_state',
    'ket_to_dm',
    'as_density_matrix',
    'wigner',
    'phase_space_grid',
    'tensor',
    'embed',
    'expect',
    'partial_trace',
    'pad',
    'cat_manifold_projector',
    'manifold_fidelity',
    'fidelity',
]
