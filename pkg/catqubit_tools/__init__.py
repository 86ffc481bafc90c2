"""
catqubit-tools: simulation and fitting toolkit for dissipative cat qubits.

This package provides Fock-space primitives, a Lindblad master-equation
engine, two-photon stabilized cat-qubit models, decay and scaling fits,
emulated calibration experiments, ATS and coupler circuit quantization,
and a Floquet analysis of the pumped buffer.
"""

__version__ = "0.1.0"
__license__ = "MIT"

# Import core modules
from .core import (
    fock,
    dynamics,
    catmodel,
    metrology,
    calibration,
    circuits,
    coupler,
    floquet,
    sweeps,
)

# Import utility modules
from .utils import (
    constants,
    file_handlers,
    units,
    validation,
)

from . import scenario

__all__ = [
    # Core modules
    "fock",
    "dynamics",
    "catmodel",
    "metrology",
    "calibration",
    "circuits",
    "coupler",
    "floquet",
    "sweeps",

    # Utility modules
    "constants",
    "file_handlers",
    "units",
    "validation",

    # Scenario files
    "scenario",
]
