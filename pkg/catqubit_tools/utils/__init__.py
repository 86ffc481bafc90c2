"""
Utility modules for catqubit-tools.

This package contains constants, validation and error types, unit
parsing and output file helpers.
"""

from .constants import *
from .file_handlers import *
from .units import *
from .validation import *

__all__ = [
    # Constants
    'GUARD_RATIO',
    'DEFAULT_RTOL',
    'DEFAULT_ATOL',
    'SPECTRAL_SETTINGS',
    'FIT_SETTINGS',
    'FLOQUET_SETTINGS',
    'CALIBRATION_DEFAULTS',
    'EXIT_CODES',
    'ERROR_MESSAGES',
    'BATCH_SETTINGS',
    'LOG_LEVELS',
    'DEFAULT_LOG_LEVEL',

    # Validation and errors
    'CatQubitError',
    'ValidationError',
    'TruncationError',
    'ConfigError',
    'NumericalError',
    'IntegrationError',
    'StiffnessError',
    'SpectralError',
    'FitError',
    'LabelingError',
    'validate_dimension',
    'validate_guard',
    'validate_rate',
    'validate_positive',
    'validate_time_grid',
    'validate_finite_array',
    'validate_choice',

    # Units
    'parse_quantity',
    'frequency_to_rate',
    'frequency_to_ghz',
    'time_to_us',
    'lifetime_to_rate',
    'rate_to_frequency_hz',
    'optional_rate',

    # File handlers
    'OutputWriter',
    'format_csv',
    'read_csv',
    'dumps_json',
    'canonical_hash',
    'file_sha256',
    'load_json',
]
