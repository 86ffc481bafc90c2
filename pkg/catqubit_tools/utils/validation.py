"""
Validation utilities for catqubit-tools.

This module provides the exception hierarchy and the input validation
helpers used throughout the catqubit-tools library.
"""

import math
from typing import Any, Dict, Optional, Sequence, Union

import numpy as np

from .constants import ERROR_MESSAGES, GUARD_RATIO


class CatQubitError(Exception):
    """Base class for all catqubit-tools errors."""

    def __init__(self, message: str, field: Optional[str] = None):
        self.message = message
        self.field = field
        super().__init__(self.message)


class ValidationError(CatQubitError):
    """Custom exception for validation errors."""


class TruncationError(ValidationError):
    """A displacement or coherent amplitude does not fit the truncated space."""


class ConfigError(ValidationError):
    """Scenario file or command-line configuration problem."""

    def __init__(self, message: str, field: Optional[str] = None,
                 line: Optional[int] = None):
        self.line = line
        location = []
        if field:
            location.append(f"field '{field}'")
        if line is not None:
            location.append(f"line {line}")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message, field)


class NumericalError(CatQubitError):
    """Base class for failures of a numerical procedure."""


class IntegrationError(NumericalError):
    """Time integration failed or violated its invariants."""


class StiffnessError(IntegrationError):
    """Adaptive step size collapsed below machine resolution."""


class SpectralError(NumericalError):
    """Eigen/singular value problem failed or found nothing usable."""


class FitError(NumericalError):
    """Least-squares fit failed to converge or returned unphysical values."""

    def __init__(self, message: str, diagnostic: Optional[Dict[str, Any]] = None):
        self.diagnostic = diagnostic or {}
        super().__init__(message)


class LabelingError(NumericalError):
    """Dressed states could not be matched to bare labels."""


def validate_dimension(dim: int, minimum: int = 2, field: str = 'dim') -> int:
    """
    Validate a truncation dimension.

    Args:
        dim: Number of retained levels
        minimum: Smallest allowed value
        field: Name reported on failure

    Returns:
        Dimension as int

    Raises:
        ValidationError: If dim is not an integer >= minimum
    """
    if isinstance(dim, bool) or not isinstance(dim, (int, np.integer)):
        raise ValidationError(
            ERROR_MESSAGES['invalid_dimension'].format(dim=dim, minimum=minimum), field
        )
    if dim < minimum:
        raise ValidationError(
            ERROR_MESSAGES['invalid_dimension'].format(dim=dim, minimum=minimum), field
        )
    return int(dim)


def validate_guard(beta: Union[complex, float], dim: int) -> complex:
    """
    Check the anti-truncation guard |beta|^2 <= dim/4.

    Args:
        beta: Complex displacement amplitude
        dim: Truncation dimension

    Returns:
        beta as complex

    Raises:
        TruncationError: If the guard is violated
    """
    beta = complex(beta)
    limit = GUARD_RATIO * dim
    beta_sq = abs(beta) ** 2
    if beta_sq > limit * (1.0 + 1e-12):
        raise TruncationError(
            ERROR_MESSAGES['guard_violation'].format(beta_sq=beta_sq, limit=limit, dim=dim),
            'beta',
        )
    return beta


def validate_rate(value: float, name: str = 'rate') -> float:
    """
    Validate a non-negative rate.

    Args:
        value: Rate value
        name: Name reported on failure

    Returns:
        Rate as float

    Raises:
        ValidationError: If value is negative or not finite
    """
    value = float(value)
    if not math.isfinite(value) or value < 0:
        raise ValidationError(
            ERROR_MESSAGES['negative_rate'].format(name=name, value=value), name
        )
    return value


def validate_positive(value: float, name: str = 'value') -> float:
    """
    Validate a strictly positive finite number.

    Args:
        value: Number to check
        name: Name reported on failure

    Returns:
        Value as float

    Raises:
        ValidationError: If value <= 0 or not finite
    """
    value = float(value)
    if not math.isfinite(value) or value <= 0:
        raise ValidationError(
            ERROR_MESSAGES['non_positive'].format(name=name, value=value), name
        )
    return value


def validate_time_grid(t_grid: Sequence[float], name: str = 't_grid') -> np.ndarray:
    """
    Validate a strictly increasing, finite time grid.

    Args:
        t_grid: Output times
        name: Name reported on failure

    Returns:
        Grid as float array

    Raises:
        ValidationError: If the grid is empty, non-finite or not increasing
    """
    grid = np.asarray(t_grid, dtype=float).ravel()
    if grid.size == 0:
        raise ValidationError(f"{name} must contain at least one time", name)
    if not np.all(np.isfinite(grid)):
        raise ValidationError(f"{name} contains non-finite values", name)
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise ValidationError(f"{name} must be strictly increasing", name)
    return grid


def validate_finite_array(values: Sequence[float], name: str = 'values',
                          min_length: int = 1) -> np.ndarray:
    """
    Validate a one-dimensional array of finite numbers.

    Args:
        values: Data to check
        name: Name reported on failure
        min_length: Smallest allowed number of entries

    Returns:
        Values as float array

    Raises:
        ValidationError: If too short or not finite
    """
    array = np.asarray(values, dtype=float).ravel()
    if array.size < min_length:
        raise ValidationError(
            f"{name} needs at least {min_length} points, got {array.size}", name
        )
    if not np.all(np.isfinite(array)):
        raise ValidationError(f"{name} contains non-finite values", name)
    return array


def validate_choice(value: Any, choices: Sequence[Any], name: str = 'value') -> Any:
    """
    Validate that a value is one of the allowed choices.

    Args:
        value: Value to check
        choices: Allowed values
        name: Name reported on failure

    Returns:
        The value

    Raises:
        ValidationError: If the value is not allowed
    """
    if value not in choices:
        raise ValidationError(
            f"Invalid {name}: {value!r} (expected one of {', '.join(map(str, choices))})",
            name,
        )
    return value


# Export all validation functions
__all__ = [
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
]
