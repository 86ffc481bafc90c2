"""
Command-line interface for catqubit-tools.

A run reads one JSON scenario, executes its command, and writes CSV curves,
JSON reports and a manifest into the output directory. Sweep points are
dispatched through SweepRunner; a failed point is recorded in the manifest
and never aborts the rest of the sweep.
"""

import argparse
import logging
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from .core.calibration import CalibrationEmulator
from .core.catmodel import CatExperimentRunner, CatParams, PulseSchedule
from .core.circuits import ATSParams, ATSQuantizer, balance_junction_energy
from .core.coupler import CouplerSpectrumSolver, CouplerSystemParams, tune_coupler_model
from .core.dynamics import MasterEquationSolver
from .core.floquet import (
    BUFFER_PHOTON,
    DESIRED_CONDITION,
    STORAGE_PHOTON,
    FloquetAnalyzer,
    StarkScan,
    StaticSystem,
    buffer_system,
    resonance_condition,
    storage_buffer_system,
)
from .core.fock import (
    cat_manifold_projector,
    cat_state,
    coherent_state,
    embed,
    fock_state,
    phase_space_grid,
    tensor,
)
from .core.metrology import (
    ExponentialFitter,
    ShotModel,
    fit_bitflip_scaling,
    fit_damped_cosine,
    fit_phaseflip_linear,
)
from .core.sweeps import SweepRunner
from .scenario import Scenario, load_scenario
from .utils.constants import (
    DEFAULT_LOG_LEVEL,
    EXIT_CODES,
    LOG_FORMAT,
    LOG_LEVELS,
    SCENARIO_COMMANDS,
    SUCCESS_MESSAGES,
    __version__,
)
from .utils.file_handlers import OutputWriter, read_csv
from .utils.validation import (
    CatQubitError,
    ConfigError,
    FitError,
    TruncationError,
    ValidationError,
)

logger = logging.getLogger(__name__)


# Sweep tasks (module level so worker processes can unpickle them)

def _initial_ket(storage, alpha: complex, initial: Dict[str, Any]):
    state = initial['state']
    if state == 'coherent':
        return coherent_state(storage, alpha)
    if state == 'cat_even':
        return cat_state(storage, alpha, 1)
    if state == 'cat_odd':
        return cat_state(storage, alpha, -1)
    if state == 'vacuum':
        return fock_state(storage, 0)
    return fock_state(storage, initial['n'])


def _simulate_task(params: CatParams, model: Dict[str, Any], initial: Dict[str, Any],
                   observables: Sequence[str], t_grid: np.ndarray,
                   schedule: Optional[PulseSchedule], rtol: float, atol: float
                   ) -> Dict[str, Any]:
    solver = MasterEquationSolver(rtol, atol, store_states=False)
    runner = CatExperimentRunner(solver, model['storage_dim'], model['buffer_dim'])
    generator = runner.generator(params, model['kind'], schedule)
    space = generator.space
    storage = space.factors[0]
    alpha = runner.cat_amplitude(params)

    ket = _initial_ket(storage, alpha, initial)
    parts = [ket] + [fock_state(factor, 0) for factor in space.factors[1:]]
    rho0 = tensor(*parts).to_dm() if len(parts) > 1 else ket.to_dm()

    operators = runner.storage_observables(space, alpha)
    operators['manifold_fidelity'] = embed(cat_manifold_projector(storage, alpha), 0, space)
    result = solver.evolve(generator, rho0, t_grid, operators)

    columns = {'time': result.times}
    for name in observables:
        columns[name] = np.real(result.expectations[name])
    return {
        'columns': columns,
        'alpha_sq': params.alpha_sq,
        'final_manifold_fidelity': float(np.real(result.expectations['manifold_fidelity'][-1])),
        'final_n': float(np.real(result.expectations['n'][-1])),
    }


def _bitflip_task(params: CatParams, model: Dict[str, Any], method: str,
                  schedule: Optional[PulseSchedule], t_grid: Optional[np.ndarray],
                  rtol: float, atol: float) -> Dict[str, float]:
    solver = MasterEquationSolver(rtol, atol, store_states=False)
    runner = CatExperimentRunner(solver, model['storage_dim'], model['buffer_dim'])
    estimate = runner.bit_flip_rate(params, model['kind'], method, schedule, t_grid)
    row = estimate.to_row()
    row['participation'] = math.nan if estimate.participation is None else estimate.participation
    row['regime_diagnostic'] = params.regime_diagnostic
    return row


def _phaseflip_task(params: CatParams, model: Dict[str, Any], t_grid: np.ndarray,
                    schedule: Optional[PulseSchedule], rtol: float, atol: float
                    ) -> Dict[str, float]:
    solver = MasterEquationSolver(rtol, atol, store_states=False)
    runner = CatExperimentRunner(solver, model['storage_dim'], model['buffer_dim'])
    row = runner.phase_flip_rate(params, model['kind'], t_grid, True, schedule).to_row()
    row['kappa_1'] = params.kappa_1
    return row


def _wigner_task(params: CatParams, x: np.ndarray, y: np.ndarray, wigner_dim: int,
                 rtol: float, atol: float) -> Dict[str, Any]:
    emulator = CalibrationEmulator(solver=MasterEquationSolver(rtol, atol))
    grid = phase_space_grid(x, y)
    values = emulator.steady_wigner(params, grid, wigner_dim)
    radius_sq, converged = CalibrationEmulator.lobe_radius_sq(grid, values)
    return {
        'columns': {'re': grid.real.ravel(), 'im': grid.imag.ravel(), 'W': values.ravel()},
        'alpha_sq': params.alpha_sq,
        'radius_sq': radius_sq,
        'converged': converged,
        'min_W': float(values.min()),
    }


def _ats_task(params: ATSParams, oscillator_dim: int,
              storage: Optional[Dict[str, Any]]) -> Dict[str, float]:
    quantizer = ATSQuantizer(oscillator_dim)
    spectrum = quantizer.quantize(params)
    row = {'E_J': params.E_J1, 'omega_b': spectrum.omega_b, 'K_b': spectrum.K_b}
    if storage is not None:
        dressed = quantizer.storage_buffer_nonlinearities(
            params, storage['g_sb'], storage['omega_s0'], storage['storage_dim'],
            storage['buffer_levels'],
        )
        row.update({'omega_s': dressed.omega_s, 'K_s': dressed.K_s, 'chi_sb': dressed.chi_sb})
    return row


def _coupler_task(params: CouplerSystemParams, flux: float, kept_levels) -> Dict[str, float]:
    return CouplerSpectrumSolver(kept_levels).spectrum(params, flux).to_row()


def _stark_task(static: StaticSystem, omega_p: np.ndarray, epsilon_p: float,
                cutoff: int) -> StarkScan:
    return FloquetAnalyzer(cutoff).stark_scan(static, omega_p, [epsilon_p])


def _calibration_task(name: str, kwargs: Dict[str, Any], shots: Optional[int], seed: int,
                      rtol: float, atol: float) -> Dict[str, Any]:
    shot_model = ShotModel(shots, seed) if shots else None
    emulator = CalibrationEmulator(shot_model, MasterEquationSolver(rtol, atol))
    result = emulator.run(name, **kwargs)
    report = result.to_report()
    report['data'] = {key: np.asarray(value).tolist() for key, value in result.data.items()}
    return report


# Run bookkeeping

@dataclass
class RunContext:
    """State shared by the command handlers of one run."""

    scenario: Scenario
    writer: OutputWriter
    runner: SweepRunner
    rtol: float
    atol: float
    tasks: List[Dict[str, Any]] = field(default_factory=list)

    def sweep(self, function: Callable[..., Any], param_list: Sequence[Dict[str, Any]],
              labels: Sequence[str]) -> List[Any]:
        """
        Run tasks and record them; failed points come back as None.

        Args:
            function: Module-level task function
            param_list: Keyword arguments per task
            labels: Human-readable name per task for the manifest

        Returns:
            Task values in param_list order
        """
        collected = self.runner.run(function, param_list)
        values: List[Any] = [None] * len(param_list)
        records = []
        for outcome in collected['results'] + collected['failures']:
            if outcome['success']:
                values[outcome['index']] = outcome['value']
            records.append({
                'label': labels[outcome['index']],
                'success': outcome['success'],
                'error': outcome['error'],
                'seconds': outcome['seconds'],
                'index': len(self.tasks) + outcome['index'],
            })
        self.tasks.extend(sorted(records, key=lambda record: record['index']))
        logger.info(SUCCESS_MESSAGES['sweep_complete'].format(count=collected['processed'],
                                                              failed=collected['failed']))
        return values

    def record(self, label: str, started: float):
        """Record a task run directly in the main process."""
        self.tasks.append({'label': label, 'success': True, 'error': None,
                           'seconds': time.perf_counter() - started, 'index': len(self.tasks)})

    def exit_code(self) -> int:
        failed = sum(1 for task in self.tasks if not task['success'])
        if failed == 0:
            return EXIT_CODES['success']
        if failed == len(self.tasks):
            return EXIT_CODES['numerical']
        return EXIT_CODES['partial']


def _sweep_labels(scenario: Scenario) -> List[str]:
    parameter, values = scenario.sweep()
    if parameter is None:
        return ['single']
    return [f"{parameter}={value}" for value in values]


def _trace_name(stem: str, index: int, total: int) -> str:
    return f"{stem}.csv" if total == 1 else f"{stem}_{index:03d}.csv"


def _successful(values: Sequence[Any]) -> List[Any]:
    return [value for value in values if value is not None]


def _rows_to_columns(rows: Sequence[Dict[str, float]], names: Sequence[str]
                     ) -> Dict[str, List[float]]:
    return {name: [row.get(name, math.nan) for row in rows] for name in names}


def _scaling_report(alpha_sq: Sequence[float], times: Sequence[float]) -> Dict[str, Any]:
    report = {}
    for model in ('exp_over_n', 'exp'):
        fit = fit_bitflip_scaling(alpha_sq, times, model)
        report[model] = {
            'prefactor': fit.prefactor,
            'exponent': fit.exponent,
            'exponent_stderr': float(math.sqrt(max(fit.covariance[1, 1], 0.0))),
            'per_photon_factor': fit.per_photon_factor,
            'residual_norm': fit.residual_norm,
        }
    return report


def _phaseflip_report(alpha_sq: Sequence[float], gamma_z: Sequence[float]) -> Dict[str, Any]:
    fit = fit_phaseflip_linear(alpha_sq, gamma_z)
    return {
        'slope_origin': fit.slope_origin,
        'slope_free': fit.slope_free,
        'intercept_free': fit.intercept_free,
        't1_eff_origin': fit.t1_eff_origin,
        't1_eff_free': fit.t1_eff_free,
    }


# Commands

def cmd_simulate(run: RunContext):
    """Evolve each sweep point and write one trace CSV per point."""
    scenario = run.scenario
    params_list = scenario.cat_params_list()
    labels = _sweep_labels(scenario)
    common = {
        'model': scenario.model(),
        'initial': scenario.initial(),
        'observables': scenario.observables(),
        't_grid': scenario.time_grid(),
        'schedule': scenario.schedule(),
        'rtol': run.rtol,
        'atol': run.atol,
    }
    values = run.sweep(_simulate_task, [dict(common, params=p) for p in params_list], labels)

    points = []
    for index, value in enumerate(values):
        if value is None:
            continue
        name = _trace_name('trace', index, len(values))
        run.writer.write_csv(name, value['columns'])
        points.append({
            'label': labels[index],
            'trace': name,
            'alpha_sq': value['alpha_sq'],
            'final_manifold_fidelity': value['final_manifold_fidelity'],
            'final_n': value['final_n'],
        })
    run.writer.write_json('simulate.json', {'points': points})


def cmd_sweep_bitflip(run: RunContext):
    """Bit-flip rate per sweep point and the exponential scaling fits."""
    scenario = run.scenario
    method = scenario.method()
    labels = _sweep_labels(scenario)
    common = {
        'model': scenario.model(),
        'method': method,
        'schedule': scenario.schedule(),
        't_grid': scenario.time_grid(required=method == 'trajectory'),
        'rtol': run.rtol,
        'atol': run.atol,
    }
    params_list = scenario.cat_params_list()
    values = run.sweep(_bitflip_task, [dict(common, params=p) for p in params_list], labels)
    rows = _successful(values)
    run.writer.write_csv('bitflip.csv', _rows_to_columns(
        rows, ('alpha_sq', 'flip_time', 'decay_time', 'rate', 'participation')))

    usable = [row for row in rows if math.isfinite(row['flip_time']) and row['flip_time'] > 0]
    report: Dict[str, Any] = {'method': method, 'points': rows, 'scaling': None}
    if len({row['alpha_sq'] for row in usable}) >= 3:
        try:
            report['scaling'] = _scaling_report([row['alpha_sq'] for row in usable],
                                                [row['flip_time'] for row in usable])
        except (FitError, ValidationError) as e:
            logger.warning("Bit-flip scaling fit skipped: %s", e)
            report['scaling_error'] = str(e)
    else:
        logger.warning("Bit-flip scaling fit needs 3 distinct photon numbers with finite times")
    run.writer.write_json('bitflip.json', report)


def cmd_phase_flip(run: RunContext):
    """Phase-flip rate per sweep point and the linear photon-number fit."""
    scenario = run.scenario
    labels = _sweep_labels(scenario)
    common = {
        'model': scenario.model(),
        't_grid': scenario.time_grid(),
        'schedule': scenario.schedule(),
        'rtol': run.rtol,
        'atol': run.atol,
    }
    params_list = scenario.cat_params_list()
    values = run.sweep(_phaseflip_task, [dict(common, params=p) for p in params_list], labels)
    rows = _successful(values)
    run.writer.write_csv('phase_flip.csv', _rows_to_columns(
        rows, ('alpha_sq', 'rate', 'decay_time', 'flip_time', 'kappa_1')))

    report: Dict[str, Any] = {'points': rows, 'linear': None}
    if len({row['alpha_sq'] for row in rows}) >= 2:
        report['linear'] = _phaseflip_report([row['alpha_sq'] for row in rows],
                                             [row['rate'] for row in rows])
    run.writer.write_json('phase_flip.json', report)


def cmd_wigner(run: RunContext):
    """Steady-state Wigner function per sweep point with the two-lobe fit."""
    scenario = run.scenario
    options = scenario.wigner()
    labels = _sweep_labels(scenario)
    common = {'x': options['x'], 'y': options['y'], 'wigner_dim': options['wigner_dim'],
              'rtol': run.rtol, 'atol': run.atol}
    params_list = scenario.cat_params_list()
    values = run.sweep(_wigner_task, [dict(common, params=p) for p in params_list], labels)

    points = []
    for index, value in enumerate(values):
        if value is None:
            continue
        name = f"wigner_{index:03d}.csv"
        run.writer.write_csv(name, value['columns'])
        points.append({key: value[key] for key in ('alpha_sq', 'radius_sq', 'converged',
                                                   'min_W')})
        points[-1].update({'label': labels[index], 'grid': name})
    radii = [point['radius_sq'] for point in points]
    run.writer.write_json('wigner.json', {
        'points': points,
        'radius_monotone': bool(np.all(np.diff(radii) > 0)) if len(radii) > 1 else None,
    })


def cmd_circuit_spectrum(run: RunContext):
    """ATS quantization, flux and junction sweeps, and the coupler spectrum."""
    scenario = run.scenario
    options = scenario.ats_options()
    if 'ats' in scenario.data:
        params = scenario.ats_params()
        started = time.perf_counter()
        quantizer = ATSQuantizer(options['oscillator_dim'])
        spectrum = quantizer.quantize(params)
        report: Dict[str, Any] = {
            'params': asdict(params),
            'omega_b': spectrum.omega_b,
            'K_b': spectrum.K_b,
            'energies': spectrum.energies,
            'oscillator_dim': spectrum.oscillator_dim,
            'convergence_shift': spectrum.convergence_shift,
            'E_J_balance': balance_junction_energy(params),
        }
        storage = options['storage']
        if storage is not None:
            dressed = quantizer.storage_buffer_nonlinearities(
                params, storage['g_sb'], storage['omega_s0'], storage['storage_dim'],
                storage['buffer_levels'],
            )
            report['storage'] = {'omega_s': dressed.omega_s, 'omega_b': dressed.omega_b,
                                 'K_s': dressed.K_s, 'chi_sb': dressed.chi_sb}
        if options['phi_delta_list'] is not None:
            run.writer.write_csv('ats_flux_sweep.csv',
                                 quantizer.flux_sweep(params, options['phi_delta_list']))
        run.writer.write_json('ats_spectrum.json', report)
        run.record('ats', started)

        if options['E_J_list'] is not None:
            param_list = [{'params': params.replace(E_J1=e_j, E_J2=e_j),
                           'oscillator_dim': options['oscillator_dim'], 'storage': storage}
                          for e_j in options['E_J_list']]
            rows = _successful(run.sweep(_ats_task, param_list,
                                         [f"E_J={e_j:.6g}" for e_j in options['E_J_list']]))
            names = ('E_J', 'omega_b', 'K_b') + (('omega_s', 'K_s', 'chi_sb') if storage else ())
            run.writer.write_csv('ats_ej_sweep.csv', _rows_to_columns(rows, names))

    if 'coupler' in scenario.data:
        _coupler_outputs(run, scenario.coupler())


def _coupler_outputs(run: RunContext, options: Dict[str, Any]):
    params = options['params']
    kept = options['kept_levels']
    if options['tune']:
        started = time.perf_counter()
        tuning = tune_coupler_model(params, kept_levels=kept)
        run.writer.write_json('coupler_tuning.json', tuning.to_report())
        run.record('coupler_tuning', started)
        params = tuning.params

    rows = _successful(run.sweep(
        _coupler_task,
        [{'params': params, 'flux': flux, 'kept_levels': kept} for flux in options['flux']],
        [f"flux={flux:.6g}" for flux in options['flux']],
    ))
    run.writer.write_csv('coupler_spectrum.csv', _rows_to_columns(
        rows, ('flux', 'omega_s', 'omega_c', 'omega_a', 'chi_sa', 'K_s_g', 'K_s_e')))

    if options['resonance_scan'] is not None:
        started = time.perf_counter()
        resonance = CouplerSpectrumSolver(kept).find_resonance(params, options['resonance_scan'])
        run.writer.write_json('coupler_resonance.json', {
            'found': resonance.found,
            'flux': resonance.flux,
            'gap': resonance.gap,
            'mixing': resonance.mixing,
            'untrackable': resonance.untrackable,
        })
        if resonance.scan:
            run.writer.write_csv('coupler_resonance_scan.csv', resonance.scan)
        run.record('coupler_resonance', started)


def cmd_floquet_scan(run: RunContext):
    """Stark scan per pump amplitude, then resonance clustering and labeling."""
    scenario = run.scenario
    options = scenario.floquet()
    ats = scenario.ats_params()
    oscillator_dim = scenario.ats_options()['oscillator_dim']
    storage = options['storage']
    if storage is None:
        static = buffer_system(ats, options['levels'], oscillator_dim)
    else:
        static = storage_buffer_system(ats, storage['omega_s0'], storage['g_sb'],
                                       storage['storage_dim'], storage['buffer_levels'],
                                       options['levels'], oscillator_dim)

    param_list = [{'static': static, 'omega_p': options['omega_p'], 'epsilon_p': epsilon,
                   'cutoff': options['cutoff']} for epsilon in options['epsilon_p']]
    scans = _successful(run.sweep(_stark_task, param_list,
                                  [f"epsilon_p={e:.6g}" for e in options['epsilon_p']]))
    if not scans:
        return
    scan = StarkScan.concatenate(scans)
    columns = scan.to_columns()
    columns['partner_gap'] = scan.partner_gap.ravel()
    run.writer.write_csv('stark_scan.csv', columns)

    report = FloquetAnalyzer(options['cutoff']).find_resonances(scan, options['gap_threshold'])
    omega_b = static.frequency(BUFFER_PHOTON)
    summary: Dict[str, Any] = {
        'omega_b_static': omega_b,
        'resonances': [resonance.to_row() for resonance in report.resonances],
        'desired': len(report.desired),
        'undesired': len(report.undesired),
    }
    if static.has_storage:
        omega_s = static.frequency(STORAGE_PHOTON)
        summary['omega_s_static'] = omega_s
        summary['predicted_desired_omega_p'] = resonance_condition(
            DESIRED_CONDITION[0], DESIRED_CONDITION[1], DESIRED_CONDITION[2], omega_s, omega_b)
    run.writer.write_json('resonances.json', summary)


def _column(table: Dict[str, np.ndarray], name: Optional[str], position: int,
            path: str) -> np.ndarray:
    names = list(table)
    if name is None:
        if position >= len(names):
            raise ConfigError(f"Input has no column {position}", path)
        name = names[position]
    if name not in table:
        raise ConfigError(f"Input has no column {name!r} (have {names})", path)
    return table[name]


def cmd_fit(run: RunContext):
    """Fit one model to a CSV table."""
    options = run.scenario.fit()
    started = time.perf_counter()
    table = read_csv(options['input'])
    x = _column(table, options['x'], 0, 'fit.x')
    y = _column(table, options['y'], 1, 'fit.y')
    sigma = None if options['sigma'] is None else _column(table, options['sigma'], 2, 'fit.sigma')
    model = options['model']

    if model in ('exp', 'exp_offset'):
        result = ExponentialFitter().fit(x, y, with_offset=model == 'exp_offset', sigma=sigma)
        report = result.to_report(model)
    elif model == 'damped_cosine':
        if options['frequency_range'] is None:
            raise ConfigError("damped_cosine needs frequency_range", 'fit.frequency_range')
        oscillation = fit_damped_cosine(x, y, options['frequency_range'])
        report = dict(asdict(oscillation), model=model, decay_time=oscillation.decay_time)
    elif model == 'bitflip_scaling':
        report = dict(_scaling_report(x, y), model=model)
    else:
        report = dict(_phaseflip_report(x, y), model=model)
    report['input'] = str(options['input'])
    run.writer.write_json('fit.json', report)
    run.record(f"fit:{model}", started)


def cmd_calibrate(run: RunContext):
    """Emulate the selected calibrations and report injected against recovered values."""
    scenario = run.scenario
    calibrations = scenario.calibrations()
    shots = scenario.shots()
    param_list = [{'name': item['name'], 'kwargs': item['kwargs'], 'shots': shots,
                   'seed': scenario.seed, 'rtol': run.rtol, 'atol': run.atol}
                  for item in calibrations]
    reports = run.sweep(_calibration_task, param_list, [item['name'] for item in calibrations])

    summary = []
    for item, report in zip(calibrations, reports):
        if report is None:
            continue
        run.writer.write_json(f"calibration_{item['name']}.json", report)
        summary.append({key: report[key] for key in ('calibration', 'injected', 'recovered',
                                                      'stderr', 'relative_error', 'flagged')})
    run.writer.write_json('calibration_summary.json', {'shots': shots, 'seed': scenario.seed,
                                                       'calibrations': summary})


COMMANDS: Dict[str, Callable[[RunContext], None]] = {
    'simulate': cmd_simulate,
    'sweep_bitflip': cmd_sweep_bitflip,
    'phase_flip': cmd_phase_flip,
    'wigner': cmd_wigner,
    'circuit_spectrum': cmd_circuit_spectrum,
    'floquet_scan': cmd_floquet_scan,
    'fit': cmd_fit,
    'calibrate': cmd_calibrate,
}


def execute(scenario: Scenario) -> int:
    """
    Run a parsed scenario and write its outputs and manifest.

    Args:
        scenario: Parsed scenario

    Returns:
        Exit code (0 success, 3 every task failed, 4 some tasks failed)

    Raises:
        CatQubitError: On configuration or numerical errors outside sweep points;
            the manifest is still written, with the error and its exit code
    """
    started = time.perf_counter()
    rtol, atol = scenario.tolerances()
    runner = SweepRunner(scenario.workers())
    output_dir = scenario.output_dir()
    logger.info("Running %s from %s into %s", scenario.command, scenario.source, output_dir)

    with OutputWriter(output_dir) as writer:
        run = RunContext(scenario, writer, runner, rtol, atol)
        status, error = EXIT_CODES['numerical'], None
        try:
            COMMANDS[scenario.command](run)
            status = run.exit_code()
        except CatQubitError as e:
            status, error = exit_code_for(e), _describe(e)
            raise
        except Exception as e:
            error = f"{type(e).__name__}: {e}"
            raise
        finally:
            manifest = {
                'scenario_hash': scenario.hash,
                'version': __version__,
                'command': scenario.command,
                'seed': scenario.seed,
                'tolerances': {'rtol': rtol, 'atol': atol},
                'status': status,
                'tasks': run.tasks,
                'wall_clock_seconds': time.perf_counter() - started,
            }
            if error is not None:
                manifest['error'] = error
            writer.write_manifest(manifest)
    logger.info(SUCCESS_MESSAGES['run_complete'].format(command=scenario.command))
    return status


def exit_code_for(error: CatQubitError) -> int:
    """Map a domain error to its process exit code."""
    if isinstance(error, TruncationError):
        return EXIT_CODES['numerical']
    if isinstance(error, ValidationError):
        return EXIT_CODES['config']
    return EXIT_CODES['numerical']


def _describe(error: CatQubitError) -> str:
    if isinstance(error, ConfigError) or error.field is None:
        return f"{type(error).__name__}: {error.message}"
    return f"{type(error).__name__} in {error.field}: {error.message}"


def _add_common_options(parser: argparse.ArgumentParser, suppress: bool):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument('--scenario', default=default, help="scenario JSON file")
    parser.add_argument('--out', default=default, help="output directory")
    parser.add_argument('--seed', type=int, default=default, help="64-bit random seed")
    parser.add_argument('--workers', type=int, default=default, help="worker processes")
    parser.add_argument('--method', choices=['gap', 'trajectory'], default=default,
                        help="bit-flip rate method")
    parser.add_argument('--tol', type=float, default=default,
                        help="integrator relative tolerance")
    parser.add_argument('--log-level', choices=LOG_LEVELS,
                        default=argparse.SUPPRESS if suppress else DEFAULT_LOG_LEVEL,
                        help="logging verbosity")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one optional subcommand per scenario command."""
    parser = argparse.ArgumentParser(
        prog='catqubit-tools',
        description="Cat-qubit simulation, fitting and circuit analysis from scenario files.",
    )
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    _add_common_options(parser, suppress=False)
    subparsers = parser.add_subparsers(dest='command', metavar='command')
    for command in SCENARIO_COMMANDS:
        sub = subparsers.add_parser(command, help=f"run the {command} command of the scenario")
        _add_common_options(sub, suppress=True)
        if command == 'fit':
            sub.add_argument('--input', help="CSV file to fit")
            sub.add_argument('--model', choices=['exp', 'exp_offset', 'damped_cosine',
                                                 'bitflip_scaling', 'phaseflip_linear'],
                             help="fit model")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Command-line entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), format=LOG_FORMAT)
    logging.captureWarnings(True)
    if not args.scenario:
        parser.error("--scenario is required")

    overrides = {
        'command': args.command,
        'out': args.out,
        'seed': args.seed,
        'workers': args.workers,
        'method': args.method,
        'tol': args.tol,
        'input': getattr(args, 'input', None),
        'model': getattr(args, 'model', None),
    }
    try:
        scenario = load_scenario(args.scenario, overrides)
        return execute(scenario)
    except CatQubitError as e:
        code = exit_code_for(e)
        logger.error(_describe(e))
        print(_describe(e), file=sys.stderr)
        return code


if __name__ == '__main__':
    sys.exit(main())
