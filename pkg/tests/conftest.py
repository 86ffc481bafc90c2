"""Shared fixtures for the catqubit-tools test suite."""

import json

import numpy as np
import pytest

from catqubit_tools.core.catmodel import CatParams
from catqubit_tools.core.dynamics import MasterEquationSolver
from catqubit_tools.core.fock import CompositeSpace, FockSpace


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def mode():
    return FockSpace(30, 'storage')


@pytest.fixture
def qubit():
    return FockSpace(2, 'qubit')


@pytest.fixture
def two_modes():
    return CompositeSpace.of(FockSpace(4, 'storage'), FockSpace(3, 'buffer'))


@pytest.fixture
def solver():
    return MasterEquationSolver()


@pytest.fixture
def ideal_params():
    """Pure two-photon stabilization, kappa_2 = 1 rad/us."""
    return CatParams(g2=1.0, alpha_sq=2.0, kappa_b=4.0)


@pytest.fixture
def noisy_params():
    """Stabilization with single-photon loss and dephasing (rad/us)."""
    return CatParams(g2=1.0, alpha_sq=2.0, kappa_b=4.0, kappa_1=0.01, kappa_phi=0.005)


@pytest.fixture
def write_scenario(tmp_path):
    """Write a scenario dict to a JSON file and return its path."""

    def _write(data, name='scenario.json'):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding='utf-8')
        return path

    return _write
