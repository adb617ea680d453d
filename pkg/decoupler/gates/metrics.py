"""
Gate metrics on the computational subspace.

The computational basis is the labeled idle eigenbasis, ordered
00, 01, 10, 11 with the first digit belonging to the first qubit.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from decoupler.crosstalk import PairLabels
from decoupler.errors import CompensationError
from decoupler.fock import LabeledSpectrum

logger = logging.getLogger(__name__)

CZ = np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)

# Diagonal magnitude below which virtual-Z phases are meaningless
COMPENSATION_FLOOR = 0.5


@dataclass(frozen=True, eq=False)
class ComputationalUnitary:
    """Projected 4x4 propagator before and after virtual-Z compensation."""

    raw: np.ndarray
    compensated: np.ndarray
    phases: Tuple[float, float]


def computational_basis(labeled: LabeledSpectrum, pair: PairLabels) -> np.ndarray:
    """Columns are the dressed states 00, 01, 10, 11."""
    return np.column_stack(
        [labeled.vector(label) for label in (pair.ground, pair.second, pair.first, pair.both)]
    )


def project(U: np.ndarray, basis: np.ndarray) -> np.ndarray:
    return basis.conj().T @ U @ basis


def compensate(U4: np.ndarray) -> ComputationalUnitary:
    """
    Remove the global phase and single-qubit Z phases.

    Raises:
        CompensationError: a diagonal element below COMPENSATION_FLOOR in magnitude
    """
    diagonal = np.diag(U4)
    if np.min(np.abs(diagonal)) < COMPENSATION_FLOOR:
        raise CompensationError(
            f"Virtual-Z compensation unreliable: min |diag| = {np.min(np.abs(diagonal)):.3f}"
        )
    global_phase = diagonal[0] / abs(diagonal[0])
    theta1 = float(np.angle(U4[2, 2] / U4[0, 0]))
    theta2 = float(np.angle(U4[1, 1] / U4[0, 0]))
    Z = np.diag(np.exp(-1j * np.array([0.0, theta2, theta1, theta1 + theta2])))
    return ComputationalUnitary(raw=U4, compensated=Z @ (U4 / global_phase), phases=(theta1, theta2))


def computational_unitary(U: np.ndarray, labeled: LabeledSpectrum, pair: PairLabels) -> ComputationalUnitary:
    """Project a full-space propagator on the labeled computational states and compensate it."""
    return compensate(project(U, computational_basis(labeled, pair)))


def process_infidelity(U4: np.ndarray, target: np.ndarray = CZ) -> float:
    """1 - |Tr(target^dag U4)| / 4"""
    return float(1.0 - abs(np.trace(target.conj().T @ U4)) / 4.0)


def leakage(U: np.ndarray, labeled: LabeledSpectrum, pair: PairLabels) -> float:
    """Largest population leaving the computational subspace over the four inputs."""
    U4 = project(U, computational_basis(labeled, pair))
    kept = np.sum(np.abs(U4) ** 2, axis=0)
    return float(np.clip(np.max(1.0 - kept), 0.0, 1.0))


def decoherence_estimate(t_gate_ns: float, tau_coherence_us: float) -> float:
    """1 - exp(-t_gate / tau)"""
    if tau_coherence_us <= 0:
        raise ValueError("Coherence time must be positive")
    return float(1.0 - np.exp(-t_gate_ns / (tau_coherence_us * 1e3)))
