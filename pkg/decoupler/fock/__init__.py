"""
Truncated Fock-space Hamiltonians, diagonalization and state labeling.

Usage:
    from decoupler.fock import TruncationPolicy, build_hamiltonian, diagonalize, label_states

    H = build_hamiltonian(params, TruncationPolicy(levels=6))
    labeled = label_states(diagonalize(H), [(0, 0, 0), (1, 0, 0), (0, 0, 1), (1, 0, 1)])
"""

from .hamiltonian import (
    FockHamiltonian,
    HamiltonianAssembler,
    TruncationPolicy,
    build_hamiltonian,
    shared_operators,
)
from .operators import FockOperators, fock_basis
from .spectrum import (
    LabeledSpectrum,
    Spectrum,
    computational_labels,
    continue_labels,
    diagonalize,
    format_label,
    label_states,
    level_table,
    parse_label,
)

__all__ = [
    "FockOperators",
    "fock_basis",
    "FockHamiltonian",
    "HamiltonianAssembler",
    "TruncationPolicy",
    "build_hamiltonian",
    "shared_operators",
    "Spectrum",
    "LabeledSpectrum",
    "diagonalize",
    "label_states",
    "continue_labels",
    "level_table",
    "computational_labels",
    "parse_label",
    "format_label",
]
