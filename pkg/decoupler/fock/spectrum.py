"""
Diagonalization and bare-state labeling.

A dressed eigenstate carries the label |jkl> of the bare product state it
overlaps most with. Labels are assigned greedily by descending overlap
weight; anything ambiguous raises LabelingError so that callers near an
avoided crossing can decide what to do with the point.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from decoupler.constants import EIGEN_RESIDUAL_TOLERANCE, OVERLAP_THRESHOLD
from decoupler.errors import EigensolverError, LabelingError
from decoupler.fock.hamiltonian import FockHamiltonian
from decoupler.solvers import get_solver

logger = logging.getLogger(__name__)

Label = Tuple[int, ...]

# Two overlaps closer than this count as a tie
TIE_TOLERANCE = 1e-9


def parse_label(text: str) -> Label:
    """'101' -> (1, 0, 1). Single-digit occupations only."""
    if not text.isdigit():
        raise ValueError(f"State labels are digit strings like '101', got {text!r}")
    return tuple(int(ch) for ch in text)


def format_label(label: Sequence[int]) -> str:
    return "".join(str(n) for n in label)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Ascending eigenvalues (rad/ns) with column eigenvectors in the bare basis."""

    hamiltonian: FockHamiltonian
    values: np.ndarray
    vectors: np.ndarray
    solver: str = "dense"
    residual: float = 0.0

    @property
    def count(self) -> int:
        return len(self.values)

    @property
    def complete(self) -> bool:
        return self.count == self.hamiltonian.dim

    def weights_of(self, label: Sequence[int]) -> np.ndarray:
        """|<label|k>|^2 for every computed eigenvector k."""
        row = self.hamiltonian.index(label)
        return np.abs(self.vectors[row, :]) ** 2

    def reconstruction_error(self) -> float:
        """||H - V diag(E) V^dag||_max relative to the norm bound (dense path only)."""
        if not self.complete:
            raise ValueError("Spectral reconstruction needs the complete spectrum")
        rebuilt = (self.vectors * self.values) @ self.vectors.conj().T
        scale = max(self.hamiltonian.norm_bound(), 1e-300)
        return float(np.max(np.abs(self.hamiltonian.dense() - rebuilt))) / scale


@dataclass(frozen=True, eq=False)
class LabeledSpectrum:
    """Spectrum plus an injective map label -> (eigenindex, overlap weight)."""

    spectrum: Spectrum
    assignment: Dict[Label, Tuple[int, float]] = field(default_factory=dict)
    threshold: float = OVERLAP_THRESHOLD

    def eigenindex(self, label: Sequence[int]) -> int:
        key = tuple(label)
        if key not in self.assignment:
            raise KeyError(f"State {format_label(key)} was not labeled")
        return self.assignment[key][0]

    def weight(self, label: Sequence[int]) -> float:
        return self.assignment[tuple(label)][1]

    def energy(self, label: Sequence[int]) -> float:
        return float(self.spectrum.values[self.eigenindex(label)])

    def vector(self, label: Sequence[int]) -> np.ndarray:
        return self.spectrum.vectors[:, self.eigenindex(label)]

    def overlap(self, dressed: Sequence[int], bare: Sequence[int]) -> float:
        """|<bare|dressed~>|^2"""
        row = self.spectrum.hamiltonian.index(bare)
        return float(np.abs(self.vector(dressed)[row]) ** 2)

    @property
    def min_weight(self) -> float:
        return min((w for _, w in self.assignment.values()), default=1.0)


def diagonalize(
    H: FockHamiltonian,
    solver: str = "auto",
    k: Optional[int] = None,
    check_residual: bool = True,
) -> Spectrum:
    """
    Diagonalize a Fock-space Hamiltonian.

    Args:
        H: Hamiltonian
        solver: 'dense', 'sparse' or 'auto'
        k: Number of lowest eigenpairs (sparse path; None takes the solver default)
        check_residual: Verify ||Hv - Ev|| < 1e-10 ||H|| for every pair

    Returns:
        Spectrum with ascending eigenvalues

    Raises:
        EigensolverError: non-convergence or residual above tolerance
    """
    backend = get_solver(solver, dim=H.dim)
    values, vectors = backend.solve(H.matrix, k=k if backend.partial else None)

    residual = 0.0
    if check_residual and len(values):
        product = H.matrix @ vectors - vectors * values
        residual = float(np.max(np.linalg.norm(product, axis=0)))
        bound = EIGEN_RESIDUAL_TOLERANCE * max(H.norm_bound(), 1.0)
        if residual > bound:
            raise EigensolverError(
                f"Eigenpair residual {residual:.3e} exceeds {bound:.3e} ({backend.name} solver)",
                residual=residual,
            )

    return Spectrum(
        hamiltonian=H, values=values, vectors=vectors, solver=backend.name, residual=residual
    )


def label_states(
    spectrum: Spectrum,
    labels: Sequence[Sequence[int]],
    threshold: float = OVERLAP_THRESHOLD,
) -> LabeledSpectrum:
    """
    Assign bare-state labels to eigenstates.

    Each label proposes the eigenstate it overlaps most with (ties go to the
    lower eigenindex). Proposals are accepted in order of descending weight.

    Args:
        spectrum: Diagonalized Hamiltonian
        labels: Bare occupation tuples to assign
        threshold: Minimum accepted overlap weight

    Returns:
        LabeledSpectrum

    Raises:
        LabelingError: a label's best overlap is below threshold, is tied with
            another eigenstate, or its eigenstate was already claimed
    """
    proposals = []
    contested: List[Tuple[Label, int, float]] = []

    for label in labels:
        key = tuple(int(n) for n in label)
        weights = spectrum.weights_of(key)
        best = int(np.argmax(weights))
        weight = float(weights[best])
        runner_up = float(np.partition(weights, -2)[-2]) if len(weights) > 1 else 0.0
        if weight < threshold or weight - runner_up < TIE_TOLERANCE:
            contested.append((key, best, weight))
            continue
        proposals.append((weight, key, best))

    assignment: Dict[Label, Tuple[int, float]] = {}
    claimed: Dict[int, Label] = {}
    # stable sort keeps the requested order among equal weights
    for weight, key, best in sorted(proposals, key=lambda p: -p[0]):
        if best in claimed:
            other = claimed[best]
            contested.append((key, best, weight))
            contested.append((other, best, assignment[other][1]))
            continue
        claimed[best] = key
        assignment[key] = (best, weight)

    if contested:
        names = ", ".join(f"{format_label(k)}->{i} ({w:.3f})" for k, i, w in contested)
        raise LabelingError(f"Ambiguous state labels: {names}", contested=contested)

    return LabeledSpectrum(spectrum=spectrum, assignment=assignment, threshold=threshold)


def continue_labels(spectrum: Spectrum, previous: LabeledSpectrum) -> LabeledSpectrum:
    """
    Carry labels from a neighboring parameter point by eigenvector overlap.

    Each labeled state of `previous` claims the eigenstate of `spectrum` it
    overlaps most with, in order of descending overlap. Both spectra must
    share the same Fock basis. The stored weight stays the overlap with the
    bare state, so it may fall below the threshold while the adiabatic
    continuation is still unambiguous.

    Raises:
        LabelingError: two labels continue into the same eigenstate
    """
    if spectrum.hamiltonian.dim != previous.spectrum.hamiltonian.dim:
        raise ValueError("Label continuation needs spectra in the same Fock basis")

    proposals = []
    for key, (index, _) in previous.assignment.items():
        overlaps = np.abs(spectrum.vectors.conj().T @ previous.spectrum.vectors[:, index]) ** 2
        best = int(np.argmax(overlaps))
        proposals.append((float(overlaps[best]), key, best))

    assignment: Dict[Label, Tuple[int, float]] = {}
    claimed: Dict[int, Label] = {}
    contested: List[Tuple[Label, int, float]] = []
    for overlap, key, best in sorted(proposals, key=lambda p: -p[0]):
        if best in claimed:
            contested.append((key, best, overlap))
            continue
        claimed[best] = key
        assignment[key] = (best, float(spectrum.weights_of(key)[best]))

    if contested:
        names = ", ".join(f"{format_label(k)}->{i} ({w:.3f})" for k, i, w in contested)
        raise LabelingError(f"Labels cannot be continued: {names}", contested=contested)

    return LabeledSpectrum(spectrum=spectrum, assignment=assignment, threshold=previous.threshold)


def computational_labels(n_modes: int, qubit_slots: Sequence[int]) -> List[Label]:
    """
    The four computational labels 00, 10, 01, 11 of two qubits at the given
    mode positions, every other mode in its ground state.
    """
    labels = []
    for a, b in ((0, 0), (1, 0), (0, 1), (1, 1)):
        state = [0] * n_modes
        state[qubit_slots[0]] = a
        state[qubit_slots[1]] = b
        labels.append(tuple(state))
    return labels


def level_table(spectrum: Spectrum, count: Optional[int] = None) -> List[Dict[str, object]]:
    """
    Lowest levels with their dominant bare state, energies relative to the ground state.

    Args:
        spectrum: Diagonalized Hamiltonian
        count: Number of levels (default: all computed)
    """
    count = spectrum.count if count is None else min(count, spectrum.count)
    weights = np.abs(spectrum.vectors[:, :count]) ** 2
    ground = spectrum.values[0]
    rows = []
    for k in range(count):
        row = int(np.argmax(weights[:, k]))
        rows.append(
            {
                "index": k,
                "energy_GHz": (spectrum.values[k] - ground) / (2.0 * np.pi),
                "dominant": format_label(spectrum.hamiltonian.label(row)),
                "weight": float(weights[row, k]),
            }
        )
    return rows
