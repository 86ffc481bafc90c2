"""
Parameter sweep execution for catqubit-tools.

This module runs independent simulation tasks over a parameter list,
optionally in worker processes, and collects per-task failures instead of
aborting the whole sweep.
"""

import logging
import multiprocessing as mp
import os
import time
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from ..utils.constants import BATCH_SETTINGS
from ..utils.validation import CatQubitError, ValidationError

logger = logging.getLogger(__name__)


def _run_task(job: Tuple[int, Callable[..., Any], Dict[str, Any]]) -> Dict[str, Any]:
    index, function, params = job
    started = time.perf_counter()
    try:
        value = function(**params)
        return {'index': index, 'params': params, 'success': True, 'value': value,
                'error': None, 'seconds': time.perf_counter() - started}
    except Exception as e:
        kind = type(e).__name__
        if not isinstance(e, CatQubitError):
            kind = f"unexpected {kind}"
        return {'index': index, 'params': params, 'success': False, 'value': None,
                'error': f"{kind}: {e}", 'seconds': time.perf_counter() - started}


class SweepRunner:
    """Sweep execution utility class."""

    def __init__(self, max_workers: Optional[int] = BATCH_SETTINGS['max_workers'],
                 chunk_size: int = BATCH_SETTINGS['chunk_size']):
        """
        Initialize sweep runner.

        Args:
            max_workers: Worker processes (None uses every CPU, 1 runs inline)
            chunk_size: Tasks handed to a worker at once
        """
        if max_workers is not None and max_workers < 1:
            raise ValidationError(f"max_workers must be >= 1, got {max_workers}", 'workers')
        self.max_workers = max_workers or os.cpu_count() or 1
        self.chunk_size = chunk_size

    def run(self, function: Callable[..., Any], param_list: Sequence[Dict[str, Any]]
            ) -> Dict[str, Any]:
        """
        Evaluate function(**params) for every entry of param_list.

        Results keep the order of param_list whatever the worker count, so
        seeded tasks give identical output for any number of workers. The
        function must be picklable when more than one worker is used.

        Args:
            function: Task callable
            param_list: Keyword arguments for each task

        Returns:
            Dictionary with total, processed, failed, results and failures
        """
        jobs = [(index, function, dict(params)) for index, params in enumerate(param_list)]
        if not jobs:
            raise ValidationError("Sweep has no tasks", 'sweep')

        started = time.perf_counter()
        workers = min(self.max_workers, len(jobs))
        logger.info("Running %d sweep tasks on %d worker(s)", len(jobs), workers)
        if workers == 1:
            outcomes: Iterable[Dict[str, Any]] = map(_run_task, jobs)
            collected = self._collect(outcomes)
        else:
            with mp.get_context('spawn').Pool(workers) as pool:
                collected = self._collect(pool.imap(_run_task, jobs, self.chunk_size))

        collected['total'] = len(jobs)
        collected['workers'] = workers
        collected['wall_clock_seconds'] = time.perf_counter() - started
        if collected['failed']:
            logger.warning("%d of %d sweep tasks failed", collected['failed'], len(jobs))
        return collected

    @staticmethod
    def _collect(outcomes: Iterable[Dict[str, Any]]) -> Dict[str, Any]:
        results: List[Dict[str, Any]] = []
        failures: List[Dict[str, Any]] = []
        for outcome in outcomes:
            if outcome['success']:
                results.append(outcome)
            else:
                logger.error("Task %d failed: %s", outcome['index'], outcome['error'])
                failures.append(outcome)
        return {
            'processed': len(results),
            'failed': len(failures),
            'results': results,
            'failures': failures,
        }


# Convenience functions
def run_sweep(function: Callable[..., Any], param_list: Sequence[Dict[str, Any]],
              max_workers: Optional[int] = 1) -> Dict[str, Any]:
    """Run a sweep and return the collected results."""
    return SweepRunner(max_workers).run(function, param_list)


# Export all sweep classes and functions
__all__ = [
    'SweepRunner',
    'run_sweep',
]
