"""Tests for unit parsing."""

import math

import pytest

from catqubit_tools.utils.units import (
    frequency_to_ghz,
    frequency_to_rate,
    lifetime_to_rate,
    parse_quantity,
    rate_to_frequency_hz,
    time_to_us,
)
from catqubit_tools.utils.validation import ConfigError


class TestParseQuantity:
    @pytest.mark.parametrize('text, expected', [
        ('578 kHz', 578e3),
        ('10.7MHz', 10.7e6),
        ('5.35 GHz', 5.35e9),
        ('1e3 Hz', 1e3),
    ])
    def test_frequencies(self, text, expected):
        assert parse_quantity(text, 'frequency') == pytest.approx(expected)

    @pytest.mark.parametrize('text, expected', [
        ('79 us', 79e-6),
        ('79 μs', 79e-6),
        ('250 ns', 250e-9),
        ('0.1 s', 0.1),
        ('2 ms', 2e-3),
    ])
    def test_times(self, text, expected):
        assert parse_quantity(text, 'time') == pytest.approx(expected)

    def test_bare_number_needs_unit(self):
        with pytest.raises(ConfigError, match='unit suffix'):
            parse_quantity(5.0, 'frequency', 'cat.g2')

    def test_bare_number_allowed(self):
        assert parse_quantity(5.0, 'frequency', require_unit=False) == 5.0

    def test_unknown_unit_names_field(self):
        with pytest.raises(ConfigError) as info:
            parse_quantity('3 THz', 'frequency', 'cat.kappa_b')
        assert info.value.field == 'cat.kappa_b'
        assert 'THz' in info.value.message

    def test_time_unit_is_not_a_frequency(self):
        with pytest.raises(ConfigError):
            parse_quantity('3 us', 'frequency')

    def test_garbage(self):
        with pytest.raises(ConfigError):
            parse_quantity('fast', 'time')

    def test_boolean_rejected(self):
        with pytest.raises(ConfigError):
            parse_quantity(True, 'time', require_unit=False)


class TestConversions:
    def test_frequency_to_rate_applies_two_pi_once(self):
        assert frequency_to_rate('1 MHz') == pytest.approx(2 * math.pi)

    def test_rate_round_trip(self):
        assert rate_to_frequency_hz(frequency_to_rate('578 kHz')) == pytest.approx(578e3)

    def test_frequency_to_ghz(self):
        assert frequency_to_ghz('7.19 GHz') == pytest.approx(7.19)
        assert frequency_to_ghz('156 kHz') == pytest.approx(156e-6)

    def test_frequency_to_ghz_bare(self):
        assert frequency_to_ghz(5.0, require_unit=False) == 5.0

    def test_time_to_us(self):
        assert time_to_us('2 ms') == pytest.approx(2000.0)

    def test_lifetime_to_rate(self):
        assert lifetime_to_rate('79 us') == pytest.approx(1 / 79.0)

    def test_infinite_lifetime(self):
        assert lifetime_to_rate('inf us') == 0.0

    def test_negative_lifetime(self):
        with pytest.raises(ConfigError):
            lifetime_to_rate('-1 us')
