"""Tests for the command-line parser and exit-code mapping."""

import pytest

from catqubit_tools.cli import RunContext, _describe, build_parser, exit_code_for
from catqubit_tools.scenario import parse_scenario
from catqubit_tools.utils.validation import (
    ConfigError,
    FitError,
    IntegrationError,
    SpectralError,
    TruncationError,
    ValidationError,
)


class TestParser:
    def test_global_options(self):
        args = build_parser().parse_args(['--scenario', 's.json', '--workers', '2',
                                          '--seed', '5', '--tol', '1e-7'])
        assert args.scenario == 's.json'
        assert args.workers == 2
        assert args.seed == 5
        assert args.tol == pytest.approx(1e-7)
        assert args.command is None
        assert args.log_level == 'INFO'

    def test_subcommand_options(self):
        args = build_parser().parse_args(['fit', '--scenario', 's.json', '--input', 'd.csv',
                                          '--model', 'exp_offset'])
        assert args.command == 'fit'
        assert args.scenario == 's.json'
        assert args.input == 'd.csv'
        assert args.model == 'exp_offset'

    def test_options_before_subcommand_survive(self):
        args = build_parser().parse_args(['--scenario', 's.json', '--out', 'runs',
                                          'sweep_bitflip', '--method', 'trajectory'])
        assert args.scenario == 's.json'
        assert args.out == 'runs'
        assert args.method == 'trajectory'

    def test_rejects_unknown_method(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(['--method', 'guess'])


class TestExitCodes:
    @pytest.mark.parametrize('error, code', [
        (ConfigError("bad"), 2),
        (ValidationError("bad"), 2),
        (TruncationError("small basis"), 3),
        (IntegrationError("stiff"), 3),
        (SpectralError("eig"), 3),
        (FitError("diverged"), 3),
    ])
    def test_mapping(self, error, code):
        assert exit_code_for(error) == code

    def test_describe(self):
        assert _describe(ValidationError("must be > 0", 'kappa_b')) == \
            "ValidationError in kappa_b: must be > 0"
        assert _describe(ConfigError("Missing kappa_b", 'cat.kappa_b')) == \
            "ConfigError: Missing kappa_b (field 'cat.kappa_b')"

    @pytest.mark.parametrize('outcomes, code', [
        ([True, True], 0),
        ([False, False], 3),
        ([True, False], 4),
        ([], 0),
    ])
    def test_run_status(self, outcomes, code):
        run = RunContext(parse_scenario({'command': 'fit'}), None, None, 1e-8, 1e-10)
        run.tasks = [{'success': ok} for ok in outcomes]
        assert run.exit_code() == code
