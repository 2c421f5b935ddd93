"""Entanglement dynamics of n qubits decaying into a common zero-temperature bath.

Exact low-excitation subspace solutions (one and two initial excitations),
a brute-force full Hilbert space integrator used as an oracle, and
two-qubit concurrence analysis of all qubit pairs.
"""

from .errors import CapacityError, ConvergenceError, DomainError, NumericalFailure
from .hilbert import (
    apply_dissipator,
    basis_state,
    collective_lowering,
    partial_trace_pair,
    special_vector,
)
from .entanglement import concurrence, concurrence_x_block
from .oracle import EvolutionConfig, Trajectory, evolve_full, steady_state
from . import subspace_e1, subspace_e2, scaling

__all__ = [
    "CapacityError",
    "ConvergenceError",
    "DomainError",
    "NumericalFailure",
    "apply_dissipator",
    "basis_state",
    "collective_lowering",
    "partial_trace_pair",
    "special_vector",
    "concurrence",
    "concurrence_x_block",
    "EvolutionConfig",
    "Trajectory",
    "evolve_full",
    "steady_state",
    "subspace_e1",
    "subspace_e2",
    "scaling",
]

__version__ = "0.1.0"
