"""Tests for the Lindblad master-equation solver."""

import math

import numpy as np
import pytest

from catqubit_tools.core.dynamics import (
    Dissipator,
    Liouvillian,
    MasterEquationSolver,
    Schedule,
    SteadySubspace,
    apply_dissipator,
    evolve,
    population_generator,
)
from catqubit_tools.core.fock import (
    DensityMatrix,
    FockSpace,
    Operator,
    annihilation,
    fock_state,
    number_operator,
    parity_operator,
)
from catqubit_tools.utils.validation import ValidationError

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.diag([1.0, -1.0]).astype(complex)


def _zero_hamiltonian(space):
    return Operator(space, np.zeros((space.dim, space.dim)), hermitian=True)


def _loss(space, rate):
    return Liouvillian(_zero_hamiltonian(space), (Dissipator(rate, annihilation(space)),))


def _pauli_channel(qubit, gamma_x, gamma_y, gamma_z):
    dissipators = tuple(
        Dissipator(rate, Operator(qubit, matrix, hermitian=True))
        for rate, matrix in ((gamma_x, PAULI_X), (gamma_y, PAULI_Y), (gamma_z, PAULI_Z))
    )
    return Liouvillian(_zero_hamiltonian(qubit), dissipators)


class TestGenerator:
    def test_dissipator_on_single_photon(self):
        space = FockSpace(3)
        result = apply_dissipator(Dissipator(1.0, annihilation(space)),
                                  fock_state(space, 1).to_dm())
        np.testing.assert_allclose(result, np.diag([1.0, -1.0, 0.0]), atol=1e-14)

    def test_negative_rate(self):
        with pytest.raises(ValidationError):
            Dissipator(-0.1, annihilation(FockSpace(3)))

    def test_non_hermitian_hamiltonian(self):
        space = FockSpace(3)
        with pytest.raises(ValidationError):
            Liouvillian(annihilation(space))

    def test_superoperator_matches_apply(self, rng):
        space = FockSpace(4)
        hamiltonian = Operator(space, np.diag([0.0, 1.0, 2.5, 4.0]), hermitian=True)
        liouvillian = Liouvillian(hamiltonian, (Dissipator(0.3, annihilation(space)),))
        raw = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        rho = raw @ raw.conj().T
        rho /= np.trace(rho)
        vectorized = liouvillian.superoperator() @ rho.ravel()
        np.testing.assert_allclose(vectorized.reshape(4, 4), liouvillian.apply(rho), atol=1e-12)

    def test_trace_preserving(self, rng):
        liouvillian = _pauli_channel(FockSpace(2), 0.1, 0.2, 0.3)
        raw = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        assert abs(np.trace(liouvillian.apply(raw @ raw.conj().T))) < 1e-12

    def test_spectrum_is_stable(self):
        values = MasterEquationSolver().spectrum(_loss(FockSpace(5), 0.4))
        assert np.max(values.real) < 1e-10
        assert np.sum(np.abs(values) < 1e-10) == 1


class TestEvolution:
    def test_photon_loss(self, solver):
        space = FockSpace(6)
        times = np.linspace(0.0, 4.0, 9)
        result = solver.evolve(_loss(space, 0.5), fock_state(space, 3), times,
                               {'n': number_operator(space)})
        np.testing.assert_allclose(result.expectations['n'], 3 * np.exp(-0.5 * times),
                                   atol=1e-6)
        assert result.statistics['max_trace_drift'] < 1e-6

    def test_pauli_channel_z_decay(self, solver, qubit):
        times = np.linspace(0.0, 5.0, 11)
        z = Operator(qubit, PAULI_Z, hermitian=True)
        result = solver.evolve(_pauli_channel(qubit, 0.1, 0.05, 0.2), fock_state(qubit, 0),
                               times, {'Z': z})
        np.testing.assert_allclose(result.expectations['Z'], np.exp(-2 * 0.15 * times),
                                   atol=1e-6)

    def test_hermitian_observables_are_real(self, solver):
        space = FockSpace(4)
        result = solver.evolve(_loss(space, 1.0), fock_state(space, 2), [0.0, 1.0],
                               {'n': number_operator(space), 'a': annihilation(space)})
        assert result.expectations['n'].dtype.kind == 'f'
        assert result.expectations['a'].dtype.kind == 'c'

    def test_states_stored(self, solver):
        space = FockSpace(4)
        result = solver.evolve(_loss(space, 1.0), fock_state(space, 1), [0.0, 1.0, 2.0])
        assert result.final_state.matrix[0, 0].real == pytest.approx(1 - math.exp(-2.0),
                                                                     abs=1e-6)
        assert isinstance(result.state(1), DensityMatrix)

    def test_states_not_stored(self):
        space = FockSpace(4)
        result = MasterEquationSolver(store_states=False).evolve(
            _loss(space, 1.0), fock_state(space, 1), [0.0, 1.0]
        )
        with pytest.raises(ValidationError):
            result.state(0)

    def test_single_time(self, solver):
        space = FockSpace(3)
        result = solver.evolve(_loss(space, 1.0), fock_state(space, 2), [0.0])
        np.testing.assert_allclose(result.final_state.matrix, fock_state(space, 2).to_dm().matrix)

    def test_space_mismatch(self, solver):
        with pytest.raises(ValidationError):
            solver.evolve(_loss(FockSpace(3), 1.0), fock_state(FockSpace(4), 0), [0.0, 1.0])

    def test_bad_grid(self, solver):
        space = FockSpace(3)
        with pytest.raises(ValidationError):
            solver.evolve(_loss(space, 1.0), fock_state(space, 0), [1.0, 0.5])

    def test_convenience_function(self):
        space = FockSpace(4)
        result = evolve(_loss(space, 1.0), fock_state(space, 1), [0.0, 1.0], tol=1e-9,
                        observables={'n': number_operator(space)})
        assert result.expectations['n'][-1] == pytest.approx(math.exp(-1.0), abs=1e-6)


class TestSchedule:
    def test_split_segments_match_static(self, solver):
        space = FockSpace(5)
        generator = _loss(space, 0.7)
        times = np.linspace(0.0, 2.0, 5)
        static = solver.evolve(generator, fock_state(space, 2), times)
        split = solver.evolve(Schedule(((0.75, generator), (1.25, generator))),
                              fock_state(space, 2), times)
        np.testing.assert_allclose(split.states, static.states, atol=1e-7)

    def test_idle_segment_freezes_populations(self, solver):
        space = FockSpace(5)
        idle = Liouvillian(_zero_hamiltonian(space))
        schedule = Schedule(((1.0, _loss(space, 1.0)), (1.0, idle)))
        result = solver.evolve(schedule, fock_state(space, 1), [0.0, 1.0, 1.5, 2.0],
                               {'n': number_operator(space)})
        expected = math.exp(-1.0)
        np.testing.assert_allclose(result.expectations['n'][1:], expected, atol=1e-6)

    def test_grid_beyond_duration(self, solver):
        space = FockSpace(3)
        schedule = Schedule(((1.0, _loss(space, 1.0)),))
        with pytest.raises(ValidationError):
            solver.evolve(schedule, fock_state(space, 1), [0.0, 2.0])

    def test_empty_schedule(self):
        with pytest.raises(ValidationError):
            Schedule(())

    def test_boundaries(self):
        space = FockSpace(3)
        schedule = Schedule(((1.0, _loss(space, 1.0)), (0.5, _loss(space, 2.0))))
        np.testing.assert_allclose(schedule.boundaries(), [0.0, 1.0, 1.5])
        assert schedule.duration == pytest.approx(1.5)


class TestSteadyState:
    def test_vacuum_under_loss(self, solver):
        space = FockSpace(6)
        state = solver.steady_state(_loss(space, 1.0))
        assert isinstance(state, DensityMatrix)
        np.testing.assert_allclose(state.matrix, fock_state(space, 0).to_dm().matrix, atol=1e-9)

    def test_two_photon_loss_is_degenerate(self, solver):
        space = FockSpace(6)
        lowering = annihilation(space)
        liouvillian = Liouvillian(_zero_hamiltonian(space),
                                  (Dissipator(1.0, lowering @ lowering),))
        result = solver.steady_state(liouvillian)
        assert isinstance(result, SteadySubspace)
        assert result.dimension == 4

    def test_parity_sector_drops_coherences(self, solver):
        space = FockSpace(6)
        lowering = annihilation(space)
        liouvillian = Liouvillian(_zero_hamiltonian(space),
                                  (Dissipator(1.0, lowering @ lowering),))
        result = solver.steady_state(liouvillian, parity=parity_operator(space))
        assert result.dimension == 2

    def test_null_vectors_smallest_first(self):
        matrix = np.diag([5.0, 2e-12, 3.0, 1e-13])
        vectors, singular = MasterEquationSolver._dense_null_space(matrix, 1e-9)
        np.testing.assert_allclose(singular, [1e-13, 2e-12])
        assert abs(vectors[0][3]) == pytest.approx(1.0)
        assert abs(vectors[1][1]) == pytest.approx(1.0)


class TestDecayRates:
    def test_pauli_channel(self, solver, qubit):
        z = Operator(qubit, PAULI_Z, hermitian=True)
        decay = solver.slowest_decay_rate(_pauli_channel(qubit, 0.1, 0.05, 0.2), z)
        assert decay.rate == pytest.approx(0.3, rel=1e-8)
        assert decay.participation == pytest.approx(1.0, abs=1e-8)

    def test_quadrature_under_loss(self, solver):
        space = FockSpace(8)
        lowering = annihilation(space)
        quadrature = Operator(space, (lowering + lowering.dag()).matrix, hermitian=True)
        decay = solver.slowest_decay_rate(_loss(space, 0.2), quadrature)
        assert decay.rate == pytest.approx(0.1, rel=1e-8)

    def test_periodic_schedule(self, solver, qubit):
        z = Operator(qubit, PAULI_Z, hermitian=True)
        flip = _pauli_channel(qubit, 0.1, 0.0, 0.0)
        idle = _pauli_channel(qubit, 0.0, 0.0, 0.3)
        decay = solver.slowest_decay_rate(Schedule(((1.0, flip), (1.0, idle))), z)
        assert decay.rate == pytest.approx(0.1, rel=1e-6)

    def test_observable_on_other_space(self, solver, qubit):
        with pytest.raises(ValidationError):
            solver.slowest_decay_rate(_loss(FockSpace(3), 1.0), number_operator(FockSpace(4)))


class TestPopulationGenerator:
    def test_loss_rates(self):
        rates = population_generator(_loss(FockSpace(4), 0.5))
        np.testing.assert_allclose(rates.sum(axis=0), 0.0, atol=1e-14)
        assert rates[1, 2] == pytest.approx(1.0)
        assert rates[2, 2] == pytest.approx(-1.0)

    def test_off_diagonal_hamiltonian(self):
        space = FockSpace(3)
        lowering = annihilation(space)
        drive = Operator(space, (lowering + lowering.dag()).matrix, hermitian=True)
        with pytest.raises(ValidationError):
            population_generator(Liouvillian(drive))
