"""
Unit handling for catqubit-tools.

Scenario files carry dimensionful values as strings such as "578 kHz" or
"79 us". Internally the master-equation layer works in microseconds and
angular frequencies in rad/us; the circuit layer works in GHz with h = 1.
Frequencies in scenarios are ordinary frequencies (kappa/2pi convention).
"""

import math
import re
from typing import Optional, Union

from .constants import ERROR_MESSAGES, FREQUENCY_UNITS, TIME_UNITS, TWO_PI
from .validation import ConfigError

_QUANTITY_PATTERN = re.compile(
    r'^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?|[-+]?inf)\s*([A-Za-zμ]+)?\s*$'
)

Quantity = Union[str, int, float]


def parse_quantity(value: Quantity, kind: str, field: str = 'value',
                   require_unit: bool = True) -> float:
    """
    Parse a "<number> <unit>" string into SI units.

    Args:
        value: String with unit, or a bare number when require_unit is False
        kind: 'frequency' (Hz) or 'time' (s)
        field: Field name reported on failure
        require_unit: Reject bare numbers

    Returns:
        Value in Hz or seconds

    Raises:
        ConfigError: On malformed input or unknown/missing unit
    """
    table = FREQUENCY_UNITS if kind == 'frequency' else TIME_UNITS
    if isinstance(value, bool):
        raise ConfigError(f"Boolean is not a {kind}", field)
    if isinstance(value, (int, float)):
        if require_unit:
            raise ConfigError(ERROR_MESSAGES['missing_unit'].format(field=field), field)
        return float(value)
    match = _QUANTITY_PATTERN.match(str(value))
    if not match:
        raise ConfigError(f"Cannot parse {kind} '{value}'", field)
    number, unit = match.groups()
    magnitude = float(number)
    if unit is None:
        if require_unit:
            raise ConfigError(ERROR_MESSAGES['missing_unit'].format(field=field), field)
        return magnitude
    if unit not in table:
        raise ConfigError(
            ERROR_MESSAGES['unknown_unit'].format(unit=unit, kind=kind, field=field), field
        )
    return magnitude * table[unit]


def frequency_to_rate(value: Quantity, field: str = 'frequency') -> float:
    """Ordinary frequency string -> angular rate in rad/us."""
    return TWO_PI * parse_quantity(value, 'frequency', field) * 1e-6


def frequency_to_ghz(value: Quantity, field: str = 'frequency',
                     require_unit: bool = True) -> float:
    """Frequency string -> GHz (bare numbers are read as GHz when allowed)."""
    if not require_unit and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    return parse_quantity(value, 'frequency', field) * 1e-9


def time_to_us(value: Quantity, field: str = 'time') -> float:
    """Time string -> microseconds."""
    return parse_quantity(value, 'time', field) * 1e6


def lifetime_to_rate(value: Quantity, field: str = 'time') -> float:
    """Lifetime string -> decay rate 1/T in 1/us (inf -> 0)."""
    t_us = time_to_us(value, field)
    if t_us <= 0:
        raise ConfigError(f"Lifetime must be > 0, got {value}", field)
    return 0.0 if math.isinf(t_us) else 1.0 / t_us


def rate_to_frequency_hz(rate: float) -> float:
    """Angular rate in rad/us -> ordinary frequency in Hz."""
    return rate / TWO_PI * 1e6


def optional_rate(value: Optional[Quantity], field: str) -> float:
    """Frequency string or None -> rad/us (None -> 0)."""
    if value is None:
        return 0.0
    return frequency_to_rate(value, field)


# Export all unit functions
__all__ = [
    'Quantity',
    'parse_quantity',
    'frequency_to_rate',
    'frequency_to_ghz',
    'time_to_us',
    'lifetime_to_rate',
    'rate_to_frequency_hz',
    'optional_rate',
]
