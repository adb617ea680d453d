"""
Time propagation of the circuit Hamiltonian under a flux pulse.

H(t) is a weighted sum of fixed operators (see HamiltonianAssembler), so a
schedule only has to interpolate the weight vector. Each step uses the
fourth-order Magnus expansion over two Gauss-Legendre nodes

    M = h/2 (H1 + H2) - i sqrt(3)/12 h^2 [H2, H1],   U_step = exp(-i M)

with the exponential taken through the eigendecomposition of the
Hermitian M. Propagation happens in the lab frame.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
from scipy import linalg
from scipy.interpolate import CubicSpline

from decoupler.constants import UNITARITY_TOLERANCE
from decoupler.errors import IntegrationError
from decoupler.fock import HamiltonianAssembler

logger = logging.getLogger(__name__)

GAUSS_OFFSET = np.sqrt(3.0) / 6.0
MAGNUS_WEIGHT = np.sqrt(3.0) / 12.0


class ParameterSchedule:
    """
    Hamiltonian coefficients sampled along a pulse and interpolated with a
    cubic spline in time.
    """

    def __init__(self, times: np.ndarray, coefficients: np.ndarray, assembler: HamiltonianAssembler):
        self.times = np.asarray(times, dtype=float)
        self.coefficients = np.asarray(coefficients, dtype=float)
        self.assembler = assembler
        if len(self.times) == 1:
            self._spline = None
        else:
            self._spline = CubicSpline(self.times, self.coefficients, axis=0)

    @classmethod
    def constant(cls, coefficients: np.ndarray, assembler: HamiltonianAssembler, t_gate: float):
        coefficients = np.asarray(coefficients, dtype=float)
        return cls(np.linspace(0.0, t_gate, 3), np.stack([coefficients] * 3), assembler)

    @property
    def t_start(self) -> float:
        return float(self.times[0])

    @property
    def t_stop(self) -> float:
        return float(self.times[-1])

    def at(self, t) -> np.ndarray:
        if self._spline is None:
            return np.broadcast_to(self.coefficients[0], np.shape(t) + self.coefficients[0].shape)
        return self._spline(t)

    def hamiltonian(self, t: float) -> np.ndarray:
        return self.assembler.dense_from_coefficients(self.at(t))


@dataclass
class Propagation:
    """Propagator over [t_start, t_stop] plus optional snapshots of U(t)."""

    unitary: np.ndarray
    t_start: float
    t_stop: float
    steps: int
    snapshot_times: List[float] = field(default_factory=list)
    snapshots: List[np.ndarray] = field(default_factory=list)

    @property
    def defect(self) -> float:
        return unitarity_defect(self.unitary)


def unitarity_defect(U: np.ndarray) -> float:
    """max |U^dag U - I|"""
    return float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))


def _magnus_step(H1: np.ndarray, H2: np.ndarray, h: float) -> np.ndarray:
    commutator = H2 @ H1 - H1 @ H2
    M = 0.5 * h * (H1 + H2) - 1j * MAGNUS_WEIGHT * h * h * commutator
    values, vectors = linalg.eigh(M)
    return (vectors * np.exp(-1j * values)) @ vectors.conj().T


def propagate(
    schedule: ParameterSchedule,
    dt: float,
    t_start: Optional[float] = None,
    t_stop: Optional[float] = None,
    snapshot_every: Optional[int] = None,
    project: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> Propagation:
    """
    Time-ordered propagator of the schedule's Hamiltonian.

    Args:
        schedule: Interpolated Hamiltonian coefficients
        dt: Maximum step in ns; the interval is split into equal steps
        t_start, t_stop: Sub-interval (defaults to the schedule's span)
        snapshot_every: Record U(t) every this many steps
        project: Applied to U(t) before a snapshot is stored (e.g. U @ psi0)

    Returns:
        Propagation with the full-space unitary

    Raises:
        IntegrationError: unitarity defect above tolerance
    """
    if dt <= 0:
        raise IntegrationError(f"Time step must be positive, got {dt}")
    t_start = schedule.t_start if t_start is None else float(t_start)
    t_stop = schedule.t_stop if t_stop is None else float(t_stop)
    span = t_stop - t_start
    steps = max(int(np.ceil(span / dt - 1e-9)), 1)
    h = span / steps

    starts = t_start + h * np.arange(steps)
    nodes = np.empty(2 * steps)
    nodes[0::2] = starts + h * (0.5 - GAUSS_OFFSET)
    nodes[1::2] = starts + h * (0.5 + GAUSS_OFFSET)
    coefficients = schedule.at(nodes)

    assembler = schedule.assembler
    U = np.eye(assembler.dim, dtype=complex)
    result = Propagation(unitary=U, t_start=t_start, t_stop=t_stop, steps=steps)

    for n in range(steps):
        H1 = assembler.dense_from_coefficients(coefficients[2 * n])
        H2 = assembler.dense_from_coefficients(coefficients[2 * n + 1])
        U = _magnus_step(H1, H2, h) @ U
        if snapshot_every and (n + 1) % snapshot_every == 0:
            result.snapshot_times.append(t_start + (n + 1) * h)
            result.snapshots.append(project(U) if project else U.copy())

    result.unitary = U
    defect = unitarity_defect(U)
    if defect > UNITARITY_TOLERANCE:
        raise IntegrationError(
            f"Propagator lost unitarity (defect {defect:.2e} > {UNITARITY_TOLERANCE:.0e}); "
            f"reduce the time step below {dt} ns"
        )
    logger.debug(f"Propagated {span:.3f} ns in {steps} steps (defect {defect:.1e})")
    return result


def check_step_convergence(
    infidelity_at: Callable[[float], float], dt: float, tolerance: float = 1e-6
) -> float:
    """
    Compare a gate metric at dt and dt/2.

    Args:
        infidelity_at: Function of the time step returning the gate infidelity
        dt: Accepted time step
        tolerance: Largest allowed change

    Returns:
        The absolute change

    Raises:
        IntegrationError: change above tolerance
    """
    coarse = infidelity_at(dt)
    fine = infidelity_at(dt / 2.0)
    change = abs(fine - coarse)
    if change > tolerance:
        raise IntegrationError(
            f"Gate infidelity changes by {change:.2e} when halving dt={dt} ns; use a smaller step"
        )
    return change
