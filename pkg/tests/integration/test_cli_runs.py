"""End-to-end runs of the command-line interface."""

import json

import numpy as np
import pytest

from catqubit_tools import cli
from catqubit_tools.cli import main
from catqubit_tools.utils.file_handlers import read_csv
from catqubit_tools.utils.validation import SpectralError

pytestmark = pytest.mark.integration


@pytest.fixture
def simulate_doc():
    return {
        'command': 'simulate',
        'cat': {'alpha_sq': 2.0, 'g2': '500 kHz', 'kappa_b': '4 MHz'},
        'model': {'kind': 'effective_exact', 'storage_dim': 25},
        'initial': {'state': 'cat_even'},
        'time': {'start': 0, 'stop': '2 us', 'points': 5},
        'seed': 11,
    }


def _run(scenario_path, out_dir, *extra):
    return main(['--scenario', str(scenario_path), '--out', str(out_dir), '--workers', '1',
                 '--log-level', 'WARNING', *extra])


def _manifest(out_dir):
    return json.loads((out_dir / 'manifest.json').read_text(encoding='utf-8'))


class TestSimulate:
    def test_ideal_cat_stays_in_manifold(self, write_scenario, tmp_path, simulate_doc):
        out = tmp_path / 'run'
        assert _run(write_scenario(simulate_doc), out) == 0
        trace = read_csv(out / 'trace.csv')
        assert list(trace) == ['time', 'Z', 'parity', 'n', 'manifold_fidelity']
        assert np.min(trace['manifold_fidelity']) >= 0.999
        np.testing.assert_allclose(trace['parity'], 1.0, atol=1e-6)

        manifest = _manifest(out)
        assert manifest['status'] == 0
        assert manifest['command'] == 'simulate'
        assert manifest['seed'] == 11
        assert {entry['path'] for entry in manifest['outputs']} == {'trace.csv',
                                                                    'simulate.json'}

    def test_rerun_is_byte_identical(self, write_scenario, tmp_path, simulate_doc):
        path = write_scenario(simulate_doc)
        first, second = tmp_path / 'first', tmp_path / 'second'
        assert _run(path, first) == 0
        assert _run(path, second) == 0
        assert (first / 'trace.csv').read_bytes() == (second / 'trace.csv').read_bytes()
        assert _manifest(first)['outputs'] == _manifest(second)['outputs']
        assert _manifest(first)['scenario_hash'] == _manifest(second)['scenario_hash']

    def test_sweep_writes_one_trace_per_point(self, write_scenario, tmp_path, simulate_doc):
        simulate_doc['sweep'] = {'parameter': 'alpha_sq', 'values': [1.0, 2.0]}
        out = tmp_path / 'sweep'
        assert _run(write_scenario(simulate_doc), out) == 0
        assert (out / 'trace_000.csv').exists()
        assert (out / 'trace_001.csv').exists()
        assert len(_manifest(out)['tasks']) == 2

    def test_failed_point_is_partial(self, write_scenario, tmp_path, simulate_doc):
        simulate_doc['sweep'] = {'parameter': 'alpha_sq', 'values': [1.0, 40.0]}
        out = tmp_path / 'partial'
        assert _run(write_scenario(simulate_doc), out) == 4
        tasks = _manifest(out)['tasks']
        assert [task['success'] for task in tasks] == [True, False]
        assert 'TruncationError' in tasks[1]['error']

    def test_failed_command_still_writes_manifest(self, write_scenario, tmp_path, simulate_doc,
                                                  monkeypatch):
        def failing(run):
            raise SpectralError("eigensolver did not converge")

        monkeypatch.setitem(cli.COMMANDS, 'simulate', failing)
        out = tmp_path / 'failed'
        assert _run(write_scenario(simulate_doc), out) == 3
        manifest = _manifest(out)
        assert manifest['status'] == 3
        assert manifest['error'] == 'SpectralError: eigensolver did not converge'

    def test_unexpected_error_still_writes_manifest(self, write_scenario, tmp_path,
                                                    simulate_doc, monkeypatch):
        def failing(run):
            raise RuntimeError("boom")

        monkeypatch.setitem(cli.COMMANDS, 'simulate', failing)
        out = tmp_path / 'crashed'
        with pytest.raises(RuntimeError):
            _run(write_scenario(simulate_doc), out)
        assert _manifest(out)['error'] == 'RuntimeError: boom'


class TestFit:
    def test_exponential_from_csv(self, write_scenario, tmp_path):
        t = np.linspace(0.0, 20.0, 41)
        rows = '\n'.join(f"{x:.12e},{0.8 * np.exp(-x / 6.0) + 0.1:.12e}" for x in t)
        (tmp_path / 'decay.csv').write_text('t,signal\n' + rows + '\n', encoding='utf-8')
        path = write_scenario({'command': 'fit', 'fit': {'input': 'decay.csv'}})
        out = tmp_path / 'fit'
        assert _run(path, out, 'fit', '--model', 'exp_offset') == 0
        report = json.loads((out / 'fit.json').read_text(encoding='utf-8'))
        assert report['model'] == 'exp_offset'
        values = {p['name']: p['value'] for p in report['parameters']}
        assert values['time_constant'] == pytest.approx(6.0, rel=1e-6)


class TestErrors:
    def test_config_error_exit_code(self, write_scenario, tmp_path, capsys):
        path = write_scenario({'command': 'simulate', 'cat': {'alpha_sq': 2.0}})
        assert _run(path, tmp_path / 'bad') == 2
        assert 'Missing kappa_b' in capsys.readouterr().err

    def test_invalid_json_reports_line(self, tmp_path, capsys):
        path = tmp_path / 'broken.json'
        path.write_text('{\n  "command": "fit",\n  "seed": 1,\n  oops\n}\n', encoding='utf-8')
        assert _run(path, tmp_path / 'bad') == 2
        assert 'line 4' in capsys.readouterr().err


class TestFloquet:
    def test_undriven_scan_has_no_resonances(self, write_scenario, tmp_path):
        path = write_scenario({
            'command': 'floquet_scan',
            'ats': {'preset': 'device'},
            'floquet': {'omega_p': {'start': '7 GHz', 'stop': '7.05 GHz', 'step': '10 MHz'},
                        'epsilon_p': [0.0], 'cutoff': 2, 'levels': 6},
        })
        out = tmp_path / 'floquet'
        assert _run(path, out) == 0
        report = json.loads((out / 'resonances.json').read_text(encoding='utf-8'))
        assert report['resonances'] == []
        assert report['desired'] == 0
        assert read_csv(out / 'stark_scan.csv')['omega_b'].size == 6
