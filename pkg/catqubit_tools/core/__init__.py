"""
Core simulation and fitting modules.

This module contains the Fock-space primitives, the master-equation
engine, the cat-qubit models, the fitting layer, the experiment
emulators and the circuit-level ATS, coupler and Floquet analyses.
"""

from .fock import *
from .dynamics import *
from .catmodel import *
from .metrology import *
from .calibration import *
from .circuits import *
from .coupler import *
from .floquet import *
from .sweeps import *

__all__ = [
    # Fock space
    'FockSpace',
    'CompositeSpace',
    'annihilation',
    'creation',
    'number_operator',
    'parity_operator',
    'identity',
    'displacement',
    'coherent_state',
    'cat_state',
    'fock_state',
    'ket_to_dm',
    'wigner',
    'tensor',
    'embed',
    'expect',
    'partial_trace',
    'pad',
    'cat_manifold_projector',
    'manifold_fidelity',
    'fidelity',

    # Dynamics
    'Dissipator',
    'Liouvillian',
    'Schedule',
    'EvolutionResult',
    'SteadySubspace',
    'DecayRate',
    'MasterEquationSolver',
    'population_generator',
    'evolve',
    'steady_state',
    'slowest_decay_rate',

    # Cat models
    'ModelKind',
    'AggressorParams',
    'CatParams',
    'PulseSchedule',
    'FlipRateEstimate',
    'CatExperimentRunner',
    'kappa2_from_g2',
    'build_full',
    'build_effective',
    'build_model',
    'build_pulsed',
    'distortion_factors',
    'bit_flip_observable',
    'cat_z_operator',
    'prepare_fock_manifold',
    'run_bit_flip',
    'run_phase_flip',

    # Metrology
    'DecayFit',
    'ScalingFit',
    'PhaseFlipFit',
    'ShotModel',
    'ExponentialFitter',
    'OscillationFit',
    'fit_damped_cosine',
    'fit_exp',
    'flip_times',
    'noise_bias',
    'cycle_error_probabilities',
    'fit_bitflip_scaling',
    'fit_phaseflip_linear',
    'sample_shots',

    # Calibration emulators
    'CalibrationResult',
    'CalibrationEmulator',
    'emulate_g2_fit',
    'emulate_displacement_calibration',
    'emulate_buffer_amp_calibration',
    'emulate_kerr_ramsey',
    'emulate_conditional_phase',
    'emulate_off_position_chi',
    'emulate_storage_coherence',

    # ATS circuit
    'ATSParams',
    'BufferSpectrum',
    'ATSQuantizer',
    'ats_effective_potential',
    'ats_full_potential',
    'ats_minimized_potential',
    'balance_junction_energy',
    'buffer_perturbative',
    'label_dressed_states',
    'flux_line_loss',
    'ats_quantize',
    'ats_flux_sweep',
    'storage_buffer_nonlinearities',

    # Coupler
    'CouplerSystemParams',
    'SpectrumResult',
    'CouplerResonance',
    'TuningResult',
    'CouplerSpectrumSolver',
    'coupler_spectrum',
    'find_coupler_resonance',
    'tune_coupler_model',

    # Floquet
    'PumpMode',
    'StaticSystem',
    'StarkScan',
    'Resonance',
    'ResonanceReport',
    'FloquetAnalyzer',
    'pump_operators',
    'buffer_system',
    'storage_buffer_system',
    'build_floquet',
    'resonance_condition',
    'stark_scan',
    'find_resonances',

    # Sweeps
    'SweepRunner',
    'run_sweep',
]
