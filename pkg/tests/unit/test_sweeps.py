"""Tests for sweep execution."""

import pytest

from catqubit_tools.core.catmodel import kappa2_from_g2
from catqubit_tools.core.sweeps import SweepRunner, run_sweep
from catqubit_tools.utils.validation import ValidationError


def _square(value):
    return value * value


def _checked(value):
    if value < 0:
        raise ValidationError("negative input", 'value')
    if value == 0:
        raise ZeroDivisionError("zero input")
    return 1.0 / value


class TestSweepRunner:
    def test_inline_results_keep_order(self):
        result = run_sweep(_square, [{'value': v} for v in (3, 1, 2)])
        assert result['total'] == 3
        assert result['workers'] == 1
        assert [r['value'] for r in result['results']] == [9, 1, 4]
        assert [r['index'] for r in result['results']] == [0, 1, 2]

    def test_failures_are_isolated(self):
        result = run_sweep(_checked, [{'value': 2.0}, {'value': -1.0}, {'value': 0.0},
                                      {'value': 4.0}])
        assert result['processed'] == 2
        assert result['failed'] == 2
        errors = {f['index']: f['error'] for f in result['failures']}
        assert errors[1].startswith('ValidationError')
        assert errors[2].startswith('unexpected ZeroDivisionError')

    def test_invalid_worker_count(self):
        with pytest.raises(ValidationError):
            SweepRunner(max_workers=0)

    def test_empty_sweep(self):
        with pytest.raises(ValidationError):
            SweepRunner(1).run(_square, [])

    def test_workers_capped_by_tasks(self):
        result = SweepRunner(max_workers=1).run(_square, [{'value': 2}])
        assert result['workers'] == 1
        assert result['wall_clock_seconds'] >= 0

    @pytest.mark.slow
    def test_process_pool_matches_inline(self):
        params = [{'g2': g2, 'kappa_b': 4.0} for g2 in (0.5, 1.0, 1.5)]
        inline = run_sweep(kappa2_from_g2, params, max_workers=1)
        pooled = run_sweep(kappa2_from_g2, params, max_workers=2)
        assert pooled['workers'] == 2
        assert [r['value'] for r in pooled['results']] == [r['value'] for r in inline['results']]
