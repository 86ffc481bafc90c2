"""
Constants and configuration for catqubit-tools.

This module contains the numerical defaults, physical reference values,
message templates and run settings used throughout the catqubit-tools
library.
"""

import math

# Version information
__version__ = "0.1.0"

# Truncation guard: |beta|^2 <= GUARD_RATIO * dim for displacements/coherent states
GUARD_RATIO = 0.25

# Tolerances for state and operator construction
OPERATOR_HERMITIAN_TOL = 1e-12
STATE_NORM_TOL = 1e-10
DENSITY_HERMITIAN_TOL = 1e-10

# Integrator defaults (Dormand-Prince 5(4))
DEFAULT_RTOL = 1e-8
DEFAULT_ATOL = 1e-10
TRACE_DRIFT_FACTOR = 100.0
MIN_EIGENVALUE_FLOOR = -1e-6

# Spectral settings
SPECTRAL_SETTINGS = {
    'dense_limit': 2500,          # superoperator size above which sparse solvers are used
    'null_space_tol': 1e-9,       # relative to the largest singular value
    'participation_floor': 0.5,
    'cluster_rtol': 1e-6,
    'cluster_atol': 1e-12,
    'sparse_eigenvalues': 12,
}

# Default truncations
DEFAULT_BUFFER_DIM = 3
MIN_BUFFER_DIM = 3
DEFAULT_COUPLER_LEVELS = 4
DEFAULT_OSCILLATOR_DIM = 30
MIN_OSCILLATOR_DIM = 15
OSCILLATOR_CONVERGENCE_STEP = 5
OMEGA_B_CONVERGENCE_GHZ = 1e-6   # 1 kHz
CHARGE_CUTOFF = 20
DEFAULT_KEPT_LEVELS = (5, 4, 4)
ATS_REGIME_RATIO_LIMIT = 0.05

# Labeling
LABEL_OVERLAP_FLOOR = 0.5

# Floquet settings
FLOQUET_SETTINGS = {
    'cutoff': 4,
    'edge_replicas': 2,
    'static_levels': 20,
    'kink_factor': 10.0,
    'kink_floor': 1e-7,          # GHz
    'cluster_gap': 2,            # grid points joining two flagged runs
    'max_pump_order': 2,
    'max_mode_order': 3,
    'gap_threshold': 0.05,       # GHz
    'match_steps': 0.5,          # grid steps between a feature and its condition
}

# Fit settings (damped Gauss-Newton / Levenberg-Marquardt)
FIT_SETTINGS = {
    'max_iterations': 200,
    'step_tolerance': 1e-10,
    'cost_tolerance': 1e-14,
    'gradient_tolerance': 1e-14,
    'min_points': 4,
}

# Shot sampling
PROBABILITY_CLIP_SILENT = 1e-9
PROBABILITY_CLIP_ERROR = 1e-3

# Calibration protocol defaults (internal units: us, rad/us)
CALIBRATION_DEFAULTS = {
    'g2_initial_beta_sq': 8.0,
    'g2_storage_dim': 40,
    'conditional_phase_alpha': 0.5,
    'conditional_phase_count': 8,
    'kerr_min_amplitude': 0.5,
    'kerr_reference_points': 4,
    'buffer_amp_min_alpha_sq': 0.5,
    'displacement_storage_dim': 40,
    'off_position_storage_dim': 100,
    'coherence_prep_beta_sq': 4.0,
    'coherence_prep_duration': 8.0,
    'coherence_displacement': 0.83,
}

# Device reference parameters (ordinary frequencies and times, as in scenarios)
DEVICE_CAT_PARAMETERS = {
    'g2': '578 kHz',
    'kappa_b': '10.7 MHz',
    'T1': '79 us',
    'T2': '116 us',
    'K_s': '1.1 kHz',
    'chi_sb': '156 kHz',
}

DOUBLED_NONLINEARITY = {
    'K_s': '9.8 kHz',
    'chi_sb': '2029 kHz',
}

DEVICE_COUPLER_TARGETS = {
    'omega_c_max': 8.40,     # GHz at 0 flux quanta
    'omega_c_min': 5.77,     # GHz at 0.5 flux quanta
    'omega_a': 5.211,        # at 0 flux quanta
    'omega_s': 5.349,        # at 0 flux quanta
    'omega_s_shift': -0.003,  # from 0 to 0.5 flux quanta
    'omega_a_shift': -0.141,
    'chi_sa_half': -5.71e-3,
    'chi_sa_038': -0.88e-3,
    'crossing_flux': 0.44,
}

# Starting point for coupler model tuning (GHz, charge couplings in GHz)
COUPLER_INITIAL_GUESS = {
    'omega_s0': 5.3505,
    'E_Cc': 0.2,
    'E_J1c': 34.23,
    'E_J2c': 11.97,
    'E_Ca': 0.25,
    'E_Ja': 15.1,
    'lambda_sc': 0.028,
    'lambda_ca': 0.185,
    'lambda_sa': 0.005,
}

# Coupler tuning: seed grid and crossing residual scale (GHz of dressed pair
# detuning; the pair moves about 50 MHz per 0.01 flux quanta near 0.44)
COUPLER_TUNING = {
    'crossing_scale': 0.005,
    'seed_E_Ca': (0.22, 0.25, 0.28),
    'seed_lambda_sa': (-0.03, -0.015, 0.0, 0.015, 0.03),
    'seed_lambda_sc_factor': (0.8, 1.0, 1.25),
    'starts': 3,
}

# Device-like ATS buffer (GHz); balance side-junction energy is 40 GHz
ATS_DEVICE_PARAMETERS = {
    'E_C': 0.06,
    'E_J_array': 57.1,
    'N': 3,
    'E_J': 57.0,
    'E_LP': 6054.0,
}

# Unit tables for scenario parsing
FREQUENCY_UNITS = {
    'Hz': 1.0,
    'kHz': 1e3,
    'MHz': 1e6,
    'GHz': 1e9,
}

TIME_UNITS = {
    's': 1.0,
    'ms': 1e-3,
    'us': 1e-6,
    'μs': 1e-6,
    'ns': 1e-9,
}

TWO_PI = 2.0 * math.pi

# Scenario commands
SCENARIO_COMMANDS = [
    'simulate',
    'sweep_bitflip',
    'phase_flip',
    'wigner',
    'circuit_spectrum',
    'floquet_scan',
    'fit',
    'calibrate',
]

SCENARIO_SECTIONS = [
    'command', 'cat', 'model', 'initial', 'schedule', 'time', 'observables',
    'sweep', 'method', 'ats', 'coupler', 'floquet', 'wigner', 'fit',
    'calibrate', 'seed', 'tolerance', 'output', 'workers',
]

CALIBRATION_NAMES = [
    'g2',
    'displacement',
    'buffer_amp',
    'kerr',
    'conditional_phase',
    'off_position_chi',
    'storage_coherence',
]

# Exit codes
EXIT_CODES = {
    'success': 0,
    'config': 2,
    'numerical': 3,
    'partial': 4,
}

# Error messages
ERROR_MESSAGES = {
    'invalid_dimension': 'Invalid truncation dimension: {dim} (must be >= {minimum})',
    'guard_violation': ('Truncation guard violated: |beta|^2 = {beta_sq:.4g} > {limit:.4g} '
                        'for dim={dim}'),
    'space_mismatch': 'Space mismatch: {left} vs {right}',
    'not_hermitian': 'Matrix is not hermitian within {tol:g}',
    'bad_norm': 'State norm {norm:.12g} deviates from 1',
    'bad_trace': 'Density matrix trace {trace:.12g} deviates from 1',
    'negative_rate': 'Rate {name} must be >= 0, got {value}',
    'non_positive': '{name} must be > 0, got {value}',
    'stiff': 'Integrator step size underflow at t={time:.6g}: {message}',
    'integration_failed': 'Integration failed: {message}',
    'trace_drift': 'Trace drift {drift:.3g} exceeds {limit:.3g}',
    'no_null_vector': (
        'No null vector within tolerance {tol:g} '
        '(smallest singular value {smallest:.3g})'),
    'no_participating_mode': 'No eigenmode reaches participation {floor} with the observable',
    'spectral_failure': 'Spectral solve failed: {error}',
    'fit_failed': 'Fit did not converge: {message}',
    'negative_time_constant': 'Fit returned non-positive time constant T={value:.6g}',
    'label_failure': 'Label {label} could not be assigned (overlap {overlap:.3f})',
    'unknown_unit': 'Unknown unit "{unit}" for {kind} field {field}',
    'missing_unit': 'Field {field} is dimensionful and needs a unit suffix',
    'processing_error': 'Error processing sweep point: {error}',
}

# Success messages
SUCCESS_MESSAGES = {
    'run_complete': 'Run completed: {command}',
    'file_saved': 'File saved: {file_path}',
    'sweep_complete': 'Sweep completed: {count} points processed, {failed} failed',
}

# Sweep settings
BATCH_SETTINGS = {
    'max_workers': None,   # None means os.cpu_count()
    'chunk_size': 1,
}

# Output formatting
CSV_FLOAT_FORMAT = '%.12e'
MANIFEST_NAME = 'manifest.json'

# Logging
LOG_LEVELS = ['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL']
DEFAULT_LOG_LEVEL = 'INFO'
LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'

# Export all constants
__all__ = [
    'GUARD_RATIO',
    'OPERATOR_HERMITIAN_TOL',
    'STATE_NORM_TOL',
    'DENSITY_HERMITIAN_TOL',
    'DEFAULT_RTOL',
    'DEFAULT_ATOL',
    'TRACE_DRIFT_FACTOR',
    'MIN_EIGENVALUE_FLOOR',
    'SPECTRAL_SETTINGS',
    'DEFAULT_BUFFER_DIM',
    'MIN_BUFFER_DIM',
    'DEFAULT_COUPLER_LEVELS',
    'DEFAULT_OSCILLATOR_DIM',
    'MIN_OSCILLATOR_DIM',
    'OSCILLATOR_CONVERGENCE_STEP',
    'OMEGA_B_CONVERGENCE_GHZ',
    'CHARGE_CUTOFF',
    'DEFAULT_KEPT_LEVELS',
    'ATS_REGIME_RATIO_LIMIT',
    'LABEL_OVERLAP_FLOOR',
    'FLOQUET_SETTINGS',
    'FIT_SETTINGS',
    'PROBABILITY_CLIP_SILENT',
    'PROBABILITY_CLIP_ERROR',
    'CALIBRATION_DEFAULTS',
    'DEVICE_CAT_PARAMETERS',
    'DOUBLED_NONLINEARITY',
    'DEVICE_COUPLER_TARGETS',
    'COUPLER_INITIAL_GUESS',
    'COUPLER_TUNING',
    'ATS_DEVICE_PARAMETERS',
    'FREQUENCY_UNITS',
    'TIME_UNITS',
    'TWO_PI',
    'SCENARIO_COMMANDS',
    'SCENARIO_SECTIONS',
    'CALIBRATION_NAMES',
    'EXIT_CODES',
    'ERROR_MESSAGES',
    'SUCCESS_MESSAGES',
    'BATCH_SETTINGS',
    'CSV_FLOAT_FORMAT',
    'MANIFEST_NAME',
    'LOG_LEVELS',
    'DEFAULT_LOG_LEVEL',
    'LOG_FORMAT',
]
