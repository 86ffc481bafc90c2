"""
Scenario files for catqubit-tools.

A scenario is a JSON document naming one command and the parameters it
needs. Dimensionful values are strings with a unit suffix ("578 kHz",
"79 us"); they are converted to internal units here and nowhere else.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .core.catmodel import (
    AggressorParams,
    CatParams,
    ModelKind,
    PulseSchedule,
    dephasing_from_coherence,
    g2_from_kappa2,
)
from .core.circuits import ATSParams
from .core.coupler import CouplerSystemParams
from .utils.constants import (
    CALIBRATION_NAMES,
    COUPLER_INITIAL_GUESS,
    DEFAULT_ATOL,
    DEFAULT_COUPLER_LEVELS,
    DEFAULT_RTOL,
    SCENARIO_COMMANDS,
    SCENARIO_SECTIONS,
)
from .utils.file_handlers import canonical_hash
from .utils.units import (
    frequency_to_ghz,
    frequency_to_rate,
    lifetime_to_rate,
    optional_rate,
    time_to_us,
)
from .utils.validation import CatQubitError, ConfigError

logger = logging.getLogger(__name__)

_CAT_KEYS = {'preset', 'alpha_sq', 'g2', 'kappa_2', 'kappa_b', 'kappa_1', 'T1', 'kappa_phi',
             'T2', 'kappa_phi_factor', 'K_s', 'chi_sb', 'aggressor'}
_AGGRESSOR_KEYS = {'chi_sc', 'kappa_c', 'kappa_c_up', 'coupler_levels'}
_ATS_ENERGIES = ('E_C', 'E_J_array', 'E_J1', 'E_J2', 'E_LP1', 'E_LP2')
_OBSERVABLES = ('Z', 'parity', 'n', 'manifold_fidelity')
_INITIAL_STATES = ('coherent', 'cat_even', 'cat_odd', 'vacuum', 'fock')

# Per-calibration keyword conversions: rate (rad/us), time/times (us), mhz, number(s), int, flag
_CALIBRATION_FIELDS = {
    'g2': {'t_grid': 'times', 'initial_g2': 'rate', 'storage_dim': 'int', 'beta_sq': 'number'},
    'displacement': {'scale_true': 'number', 'amplitudes': 'numbers', 'storage_dim': 'int'},
    'buffer_amp': {'drive_amplitudes': 'numbers', 'alpha_sq_per_amplitude': 'number',
                   'grid_step': 'number', 'wigner_dim': 'int'},
    'kerr': {'K_s_true': 'rate', 'amplitudes': 'numbers', 'delays': 'times',
             'kappa_1': 'rate', 'ramsey_frequency': 'mhz'},
    'conditional_phase': {'chi_sa_true': 'rate', 'pulse_lengths': 'times', 'phases': 'numbers',
                          'alpha': 'number', 'contrast': 'number', 'offset': 'number',
                          'reference_phase': 'number'},
    'off_position_chi': {'chi_sa_true': 'rate', 'alpha_sq_list': 'numbers', 'delays': 'times',
                         'ramsey_frequency': 'mhz', 'ancilla_t2': 'time', 'storage_dim': 'int'},
    'storage_coherence': {'delays': 'times', 'ramsey_frequency': 'mhz',
                          'with_dissipation': 'flag', 'storage_dim': 'int'},
}
_CALIBRATIONS_WITH_CAT = {'g2': 'true_params', 'buffer_amp': 'params',
                          'storage_coherence': 'params'}


def _require_mapping(value: Any, path: str) -> Dict[str, Any]:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"Expected an object, got {type(value).__name__}", path)
    return value


def _check_keys(section: Mapping[str, Any], allowed: Sequence[str], path: str):
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise ConfigError(f"Unknown keys {unknown}", path)


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"Expected a number, got {value!r}", path)
    return float(value)


def _integer(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"Expected an integer, got {value!r}", path)
    return value


def _seed(value: Any) -> int:
    seed = _integer(value, 'seed')
    if seed < 0 or seed >= 2 ** 64:
        raise ConfigError("seed must be an unsigned 64-bit integer", 'seed')
    return seed


def _numbers(value: Any, path: str) -> List[float]:
    if not isinstance(value, list):
        raise ConfigError("Expected a list of numbers", path)
    return [_number(item, f'{path}[{index}]') for index, item in enumerate(value)]


def _axis(value: Any, path: str, convert) -> np.ndarray:
    """List of values, or {start, stop, points|step} with unit strings."""
    if isinstance(value, list):
        return np.array([convert(item, f'{path}[{i}]') for i, item in enumerate(value)])
    section = _require_mapping(value, path)
    _check_keys(section, ('start', 'stop', 'points', 'step'), path)
    if 'stop' not in section:
        raise ConfigError("Axis needs 'stop'", path)
    start = convert(section.get('start', 0), f'{path}.start')
    stop = convert(section['stop'], f'{path}.stop')
    if 'step' in section:
        step = convert(section['step'], f'{path}.step')
        if step <= 0:
            raise ConfigError("Axis step must be > 0", f'{path}.step')
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return start + step * np.arange(count)
    points = _integer(section.get('points', 2), f'{path}.points')
    return np.linspace(start, stop, points)


def _zero_or(convert):
    # bare 0 is accepted as a start value for any dimension
    def wrapped(value, path):
        if not isinstance(value, bool) and value == 0:
            return 0.0
        return convert(value, path)
    return wrapped


# Keys that place a run without changing its results
_PLACEMENT_KEYS = frozenset({'out', 'output', 'workers', 'log_level'})

_time = _zero_or(time_to_us)
_rate = frequency_to_rate
_ghz = _zero_or(frequency_to_ghz)


def _mhz(value: Any, path: str) -> float:
    return frequency_to_ghz(value, path) * 1e3


@dataclass
class Scenario:
    """
    Parsed scenario document.

    Attributes:
        command: Command to run
        data: Raw document (after command-line overrides)
        source: File the scenario was read from
    """

    command: str
    data: Dict[str, Any]
    source: Optional[Path] = None
    overrides: Dict[str, Any] = field(default_factory=dict)

    @property
    def seed(self) -> int:
        return _seed(self.overrides.get('seed', self.data.get('seed', 0)))

    @property
    def hash(self) -> str:
        """Digest of the result-determining settings; output location and workers excluded."""
        data = {key: value for key, value in self.data.items()
                if key not in _PLACEMENT_KEYS}
        overrides = {key: value for key, value in self.overrides.items()
                     if key not in _PLACEMENT_KEYS}
        return canonical_hash({'scenario': data, 'overrides': overrides})

    def section(self, name: str) -> Dict[str, Any]:
        return _require_mapping(self.data.get(name), name)

    def output_dir(self, default: str = 'out') -> Path:
        out = self.overrides.get('out') or self.data.get('output') or default
        return Path(out)

    def workers(self) -> Optional[int]:
        workers = self.overrides.get('workers', self.data.get('workers'))
        if workers is None:
            return None
        workers = _integer(workers, 'workers')
        if workers < 1:
            raise ConfigError("workers must be >= 1", 'workers')
        return workers

    def method(self) -> str:
        method = self.overrides.get('method') or self.data.get('method', 'gap')
        if method not in ('gap', 'trajectory'):
            raise ConfigError(f"Unknown method {method!r} (gap or trajectory)", 'method')
        return method

    def tolerances(self) -> Tuple[float, float]:
        section = self.section('tolerance')
        _check_keys(section, ('rtol', 'atol'), 'tolerance')
        rtol = _number(section.get('rtol', DEFAULT_RTOL), 'tolerance.rtol')
        atol = _number(section.get('atol', DEFAULT_ATOL), 'tolerance.atol')
        if 'tol' in self.overrides:
            rtol = float(self.overrides['tol'])
            atol = rtol * 1e-2
        if rtol <= 0 or atol <= 0:
            raise ConfigError("Tolerances must be > 0", 'tolerance')
        return rtol, atol

    # Cat model

    def cat_params(self, changes: Optional[Mapping[str, Any]] = None) -> CatParams:
        """
        Build CatParams from the 'cat' section.

        Args:
            changes: Raw values replacing entries of the section (sweep points)

        Returns:
            CatParams in rad/us
        """
        section = dict(self.section('cat'))
        section.update(changes or {})
        _check_keys(section, _CAT_KEYS, 'cat')
        if 'alpha_sq' not in section:
            raise ConfigError("Missing alpha_sq", 'cat.alpha_sq')
        alpha_sq = _number(section['alpha_sq'], 'cat.alpha_sq')
        factor = _number(section.get('kappa_phi_factor', 1.0), 'cat.kappa_phi_factor')

        preset = section.get('preset')
        if preset is not None:
            if preset not in ('device', 'doubled'):
                raise ConfigError(f"Unknown preset {preset!r}", 'cat.preset')
            params = CatParams.device_defaults(alpha_sq, factor)
            if preset == 'doubled':
                params = params.doubled_nonlinearity()
            base = {}
        else:
            params = None
            base = {'g2': 0.0, 'kappa_1': 0.0, 'kappa_phi': 0.0, 'K_s': 0.0, 'chi_sb': 0.0}

        values = dict(base)
        if 'kappa_b' in section:
            values['kappa_b'] = _rate(section['kappa_b'], 'cat.kappa_b')
        elif params is None:
            raise ConfigError("Missing kappa_b", 'cat.kappa_b')
        kappa_b = values.get('kappa_b', params.kappa_b if params else None)
        if 'g2' in section and 'kappa_2' in section:
            raise ConfigError("Give either g2 or kappa_2", 'cat.g2')
        if 'g2' in section:
            values['g2'] = _rate(section['g2'], 'cat.g2')
        elif 'kappa_2' in section:
            values['g2'] = g2_from_kappa2(_rate(section['kappa_2'], 'cat.kappa_2'), kappa_b)

        if 'T1' in section and 'kappa_1' in section:
            raise ConfigError("Give either T1 or kappa_1", 'cat.T1')
        if 'T2' in section:
            if 'T1' not in section or 'kappa_phi' in section:
                raise ConfigError("T2 needs T1 and excludes kappa_phi", 'cat.T2')
            t1, t2 = time_to_us(section['T1'], 'cat.T1'), time_to_us(section['T2'], 'cat.T2')
            values['kappa_1'], values['kappa_phi'] = dephasing_from_coherence(t1, t2, factor)
        elif 'T1' in section:
            values['kappa_1'] = lifetime_to_rate(section['T1'], 'cat.T1')
        if 'kappa_1' in section:
            values['kappa_1'] = _rate(section['kappa_1'], 'cat.kappa_1')
        if 'kappa_phi' in section:
            values['kappa_phi'] = _rate(section['kappa_phi'], 'cat.kappa_phi')
        for name in ('K_s', 'chi_sb'):
            if name in section:
                values[name] = _rate(section[name], f'cat.{name}')
        if 'aggressor' in section:
            values['aggressor'] = self._aggressor(section['aggressor'])

        try:
            if params is None:
                return CatParams(alpha_sq=alpha_sq, **values)
            return params.replace(alpha_sq=alpha_sq, **values)
        except ConfigError:
            raise
        except CatQubitError as e:
            raise ConfigError(e.message, f'cat.{e.field}' if e.field else 'cat') from e

    @staticmethod
    def _aggressor(value: Any) -> AggressorParams:
        section = _require_mapping(value, 'cat.aggressor')
        _check_keys(section, _AGGRESSOR_KEYS, 'cat.aggressor')
        if 'chi_sc' not in section or 'kappa_c' not in section:
            raise ConfigError("Aggressor needs chi_sc and kappa_c", 'cat.aggressor')
        return AggressorParams(
            chi_sc=_rate(section['chi_sc'], 'cat.aggressor.chi_sc'),
            kappa_c=_rate(section['kappa_c'], 'cat.aggressor.kappa_c'),
            kappa_c_up=optional_rate(section.get('kappa_c_up'), 'cat.aggressor.kappa_c_up'),
            coupler_levels=_integer(section.get('coupler_levels', DEFAULT_COUPLER_LEVELS),
                                    'cat.aggressor.coupler_levels'),
        )

    def model(self) -> Dict[str, Any]:
        """Model kind and truncations from the 'model' section."""
        section = self.section('model')
        _check_keys(section, ('kind', 'storage_dim', 'buffer_dim'), 'model')
        try:
            kind = ModelKind.parse(section.get('kind', ModelKind.EFFECTIVE_EXACT.value))
        except CatQubitError as e:
            raise ConfigError(e.message, 'model.kind') from e
        storage_dim = section.get('storage_dim')
        return {
            'kind': kind,
            'storage_dim': None if storage_dim is None else _integer(storage_dim,
                                                                     'model.storage_dim'),
            'buffer_dim': _integer(section.get('buffer_dim', 3), 'model.buffer_dim'),
        }

    def initial(self) -> Dict[str, Any]:
        section = self.section('initial')
        _check_keys(section, ('state', 'n'), 'initial')
        state = section.get('state', 'coherent')
        if state not in _INITIAL_STATES:
            raise ConfigError(f"Unknown initial state {state!r}", 'initial.state')
        return {'state': state, 'n': _integer(section.get('n', 0), 'initial.n')}

    def observables(self) -> List[str]:
        names = self.data.get('observables', list(_OBSERVABLES))
        if not isinstance(names, list):
            raise ConfigError("Expected a list of observable names", 'observables')
        for name in names:
            if name not in _OBSERVABLES:
                raise ConfigError(f"Unknown observable {name!r}", 'observables')
        return names

    def time_grid(self, required: bool = True) -> Optional[np.ndarray]:
        """Output times in us from the 'time' section."""
        if 'time' not in self.data:
            if required:
                raise ConfigError("Missing time grid", 'time')
            return None
        grid = _axis(self.data['time'], 'time', _time)
        if grid.size < 2 or np.any(np.diff(grid) <= 0):
            raise ConfigError("Time grid must be strictly increasing with >= 2 points", 'time')
        return grid

    def schedule(self) -> Optional[PulseSchedule]:
        if 'schedule' not in self.data:
            return None
        section = self.section('schedule')
        _check_keys(section, ('t_cycle', 't_on', 'n_cycles'), 'schedule')
        try:
            return PulseSchedule(
                t_cycle=time_to_us(section.get('t_cycle'), 'schedule.t_cycle'),
                t_on=time_to_us(section.get('t_on'), 'schedule.t_on'),
                n_cycles=_integer(section.get('n_cycles', 1), 'schedule.n_cycles'),
            )
        except ConfigError:
            raise
        except CatQubitError as e:
            raise ConfigError(e.message, f'schedule.{e.field}') from e

    def sweep(self) -> Tuple[Optional[str], List[Any]]:
        """
        Sweep axis over one 'cat' entry.

        Returns:
            (parameter, raw values); (None, [None]) when no sweep is given
        """
        section = self.section('sweep')
        if not section:
            return None, [None]
        _check_keys(section, ('parameter', 'values'), 'sweep')
        parameter = section.get('parameter')
        if parameter not in _CAT_KEYS - {'preset', 'aggressor'}:
            raise ConfigError(f"Cannot sweep {parameter!r}", 'sweep.parameter')
        values = section.get('values')
        if not isinstance(values, list):
            raise ConfigError("Sweep values must be a list", 'sweep.values')
        if not values:
            return None, [None]
        return parameter, values

    def cat_params_list(self) -> List[CatParams]:
        parameter, values = self.sweep()
        if parameter is None:
            return [self.cat_params()]
        return [self.cat_params({parameter: value}) for value in values]

    # Circuits

    def ats_params(self) -> ATSParams:
        """ATSParams in GHz from the 'ats' section (or the device preset)."""
        section = self.section('ats')
        if section.get('preset') == 'device':
            e_j = section.get('E_J')
            params = ATSParams.device(None if e_j is None else _ghz(e_j, 'ats.E_J'))
            return params.replace(phi_delta=_number(section.get('phi_delta', math.pi / 2),
                                                    'ats.phi_delta'))
        values: Dict[str, Any] = {}
        for name in _ATS_ENERGIES:
            if name in section:
                values[name] = frequency_to_ghz(section[name], f'ats.{name}')
        for name in ('phi_sigma', 'phi_delta'):
            if name in section:
                values[name] = _number(section[name], f'ats.{name}')
        values['N'] = _integer(section.get('N', 1), 'ats.N')
        missing = [name for name in ('E_C', 'E_J_array', 'E_J1', 'E_J2') if name not in values]
        if missing:
            raise ConfigError(f"Missing ATS energies {missing}", 'ats')
        try:
            return ATSParams(**values)
        except CatQubitError as e:
            raise ConfigError(e.message, f'ats.{e.field}') from e

    def ats_options(self) -> Dict[str, Any]:
        section = self.section('ats')
        allowed = set(_ATS_ENERGIES) | {'preset', 'E_J', 'N', 'phi_sigma', 'phi_delta',
                                        'phi_delta_list', 'E_J_list', 'oscillator_dim',
                                        'storage'}
        _check_keys(section, allowed, 'ats')
        options: Dict[str, Any] = {
            'oscillator_dim': _integer(section.get('oscillator_dim', 30), 'ats.oscillator_dim'),
            'phi_delta_list': (_numbers(section['phi_delta_list'], 'ats.phi_delta_list')
                               if 'phi_delta_list' in section else None),
            'E_J_list': (_axis(section['E_J_list'], 'ats.E_J_list', _ghz).tolist()
                         if 'E_J_list' in section else None),
            'storage': None,
        }
        if 'storage' in section:
            options['storage'] = self._storage(section['storage'], 'ats.storage')
        return options

    @staticmethod
    def _storage(value: Any, path: str) -> Dict[str, Any]:
        section = _require_mapping(value, path)
        _check_keys(section, ('omega_s0', 'g_sb', 'storage_dim', 'buffer_levels'), path)
        if 'omega_s0' not in section or 'g_sb' not in section:
            raise ConfigError("Storage needs omega_s0 and g_sb", path)
        return {
            'omega_s0': frequency_to_ghz(section['omega_s0'], f'{path}.omega_s0'),
            'g_sb': frequency_to_ghz(section['g_sb'], f'{path}.g_sb'),
            'storage_dim': _integer(section.get('storage_dim', 8), f'{path}.storage_dim'),
            'buffer_levels': _integer(section.get('buffer_levels', 10), f'{path}.buffer_levels'),
        }

    def coupler(self) -> Dict[str, Any]:
        """Coupler parameters (GHz), flux list and options from the 'coupler' section."""
        section = self.section('coupler')
        _check_keys(section, ('params', 'flux', 'kept_levels', 'tune', 'resonance_scan'),
                    'coupler')
        raw = _require_mapping(section.get('params'), 'coupler.params')
        _check_keys(raw, COUPLER_INITIAL_GUESS, 'coupler.params')
        values = dict(COUPLER_INITIAL_GUESS)
        for name, value in raw.items():
            values[name] = frequency_to_ghz(value, f'coupler.params.{name}')
        kept = section.get('kept_levels', [5, 4, 4])
        if not isinstance(kept, list) or len(kept) != 3:
            raise ConfigError("kept_levels needs three integers", 'coupler.kept_levels')
        return {
            'params': CouplerSystemParams(**values),
            'flux': _numbers(section.get('flux', [0.0, 0.5]), 'coupler.flux'),
            'kept_levels': tuple(_integer(k, 'coupler.kept_levels') for k in kept),
            'tune': bool(section.get('tune', False)),
            'resonance_scan': (_axis(section['resonance_scan'], 'coupler.resonance_scan',
                                     lambda v, p: _number(v, p))
                               if 'resonance_scan' in section else None),
        }

    def floquet(self) -> Dict[str, Any]:
        """Pump grid (GHz), amplitudes and Floquet options."""
        section = self.section('floquet')
        _check_keys(section, ('omega_p', 'epsilon_p', 'cutoff', 'storage', 'gap_threshold',
                              'levels'), 'floquet')
        if 'omega_p' not in section or 'epsilon_p' not in section:
            raise ConfigError("Floquet scan needs omega_p and epsilon_p", 'floquet')
        grid = _axis(section['omega_p'], 'floquet.omega_p', _ghz)
        if grid.size < 3 or np.any(np.diff(grid) <= 0):
            raise ConfigError("omega_p grid must increase with >= 3 points", 'floquet.omega_p')
        return {
            'omega_p': grid,
            'epsilon_p': _numbers(section['epsilon_p'], 'floquet.epsilon_p'),
            'cutoff': _integer(section.get('cutoff', 4), 'floquet.cutoff'),
            'levels': _integer(section.get('levels', 20), 'floquet.levels'),
            'gap_threshold': (frequency_to_ghz(section['gap_threshold'],
                                               'floquet.gap_threshold')
                              if 'gap_threshold' in section else 0.05),
            'storage': (self._storage(section['storage'], 'floquet.storage')
                        if 'storage' in section else None),
        }

    def wigner(self) -> Dict[str, Any]:
        section = self.section('wigner')
        _check_keys(section, ('x', 'y', 'step', 'wigner_dim'), 'wigner')
        x_range = _numbers(section.get('x', [-3.2, 3.2]), 'wigner.x')
        y_range = _numbers(section.get('y', [-2.0, 2.0]), 'wigner.y')
        step = _number(section.get('step', 0.2), 'wigner.step')
        if len(x_range) != 2 or len(y_range) != 2 or step <= 0:
            raise ConfigError("Wigner ranges need [min, max] and a positive step", 'wigner')
        return {
            'x': np.arange(x_range[0], x_range[1] + 1e-9, step),
            'y': np.arange(y_range[0], y_range[1] + 1e-9, step),
            'wigner_dim': _integer(section.get('wigner_dim', 64), 'wigner.wigner_dim'),
        }

    def fit(self) -> Dict[str, Any]:
        section = self.section('fit')
        _check_keys(section, ('input', 'model', 'x', 'y', 'sigma', 'frequency_range'), 'fit')
        input_path = self.overrides.get('input') or section.get('input')
        model = self.overrides.get('model') or section.get('model', 'exp')
        if not input_path:
            raise ConfigError("Fit needs an input CSV", 'fit.input')
        models = ('exp', 'exp_offset', 'damped_cosine', 'bitflip_scaling', 'phaseflip_linear')
        if model not in models:
            raise ConfigError(f"Unknown fit model {model!r}", 'fit.model')
        path = Path(input_path)
        if not path.is_absolute() and self.source is not None:
            candidate = self.source.parent / path
            path = candidate if candidate.exists() else path
        frequency_range = section.get('frequency_range')
        if frequency_range is not None:
            frequency_range = tuple(_numbers(frequency_range, 'fit.frequency_range'))
        return {
            'input': path,
            'model': model,
            'x': section.get('x'),
            'y': section.get('y'),
            'sigma': section.get('sigma'),
            'frequency_range': frequency_range,
        }

    def calibrations(self) -> List[Dict[str, Any]]:
        """
        Calibration runs from the 'calibrate' section.

        The section holds 'shots' (null for noiseless data) and one entry per
        calibration name with its keyword arguments.
        """
        section = self.section('calibrate')
        _check_keys(section, ['shots'] + list(CALIBRATION_NAMES), 'calibrate')
        names = [name for name in CALIBRATION_NAMES if name in section]
        if not names:
            raise ConfigError("No calibration selected", 'calibrate')
        runs = []
        for name in names:
            raw = _require_mapping(section[name], f'calibrate.{name}')
            fields = _CALIBRATION_FIELDS[name]
            _check_keys(raw, fields, f'calibrate.{name}')
            kwargs = {key: self._calibration_value(kind, raw[key], f'calibrate.{name}.{key}')
                      for key, kind in fields.items() if key in raw}
            if name in _CALIBRATIONS_WITH_CAT:
                kwargs[_CALIBRATIONS_WITH_CAT[name]] = self.cat_params()
            runs.append({'name': name, 'kwargs': kwargs})
        return runs

    def shots(self) -> Optional[int]:
        shots = self.section('calibrate').get('shots')
        return None if shots is None else _integer(shots, 'calibrate.shots')

    @staticmethod
    def _calibration_value(kind: str, value: Any, path: str) -> Any:
        if kind == 'rate':
            return _rate(value, path)
        if kind == 'time':
            return time_to_us(value, path)
        if kind == 'times':
            return _axis(value, path, _time)
        if kind == 'mhz':
            return _mhz(value, path)
        if kind == 'number':
            return _number(value, path)
        if kind == 'numbers':
            return np.array(_numbers(value, path))
        if kind == 'int':
            return _integer(value, path)
        return bool(value)


def parse_scenario(data: Any, source: Optional[Path] = None,
                   overrides: Optional[Dict[str, Any]] = None) -> Scenario:
    """
    Validate the top level of a scenario document.

    Args:
        data: Decoded JSON object
        source: File the document came from
        overrides: Command-line values taking precedence (command, out, seed, workers,
            method, tol, input, model)

    Returns:
        Scenario

    Raises:
        ConfigError: On unknown sections or a missing/unknown command
    """
    data = _require_mapping(data, '<root>')
    _check_keys(data, SCENARIO_SECTIONS, '<root>')
    overrides = {key: value for key, value in (overrides or {}).items() if value is not None}
    command = overrides.pop('command', data.get('command'))
    if command not in SCENARIO_COMMANDS:
        raise ConfigError(
            f"Unknown command {command!r} (expected one of {', '.join(SCENARIO_COMMANDS)})",
            'command',
        )
    _seed(overrides.get('seed', data.get('seed', 0)))
    return Scenario(command, data, source, overrides)


def load_scenario(file_path: Union[str, Path],
                  overrides: Optional[Dict[str, Any]] = None) -> Scenario:
    """
    Read and validate a scenario file.

    Args:
        file_path: Path to a JSON scenario
        overrides: Command-line overrides

    Returns:
        Scenario

    Raises:
        ConfigError: If the file is missing, is not valid JSON, or fails validation
    """
    path = Path(file_path)
    if not path.exists():
        raise ConfigError(f"Scenario file not found: {path}", 'scenario')
    try:
        with open(path, 'r', encoding='utf-8') as handle:
            data = json.load(handle)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Invalid JSON: {e.msg} at column {e.colno}", 'scenario',
                          e.lineno) from e
    except OSError as e:
        raise ConfigError(f"Cannot read scenario {path}: {e}", 'scenario') from e
    scenario = parse_scenario(data, path, overrides)
    logger.debug("Loaded scenario %s (%s)", path, scenario.command)
    return scenario


# Export all scenario classes and functions
__all__ = [
    'Scenario',
    'parse_scenario',
    'load_scenario',
]
