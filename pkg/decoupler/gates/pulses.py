"""
Flux pulses - erf flattop envelopes and their conversion to coupler flux

Pulses are specified as frequency trajectories. The Hamiltonian is a
function of flux, so every sample is mapped back through omega_c(phi_ext)
on a monotone branch of the coupler spectrum.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import erf

from decoupler.circuit.coupler import CouplerSpec, coupler_frequency
from decoupler.errors import InvalidSpecError, OutOfRegimeError, UnreachableFrequencyError

logger = logging.getLogger(__name__)

DEFAULT_BRANCH = (0.0, np.pi)
BRANCH_GRID_POINTS = 257


@dataclass(frozen=True)
class PulseSpec:
    """
    Gaussian flattop from omega_idle to omega_int and back.

    Frequencies in rad/ns, times in ns. channel names what is being tuned
    ('coupler' or a qubit mode name).
    """

    omega_idle: float
    omega_int: float
    tau: float
    t_gate: float
    channel: str = "coupler"

    def validate(self) -> None:
        if not self.t_gate > 0:
            raise InvalidSpecError(f"Gate time must be positive, got {self.t_gate}")
        if not self.tau > 0:
            raise InvalidSpecError(f"Rise/fall time must be positive, got {self.tau}")

    @property
    def amplitude(self) -> float:
        return self.omega_int - self.omega_idle


def flattop(pulse: PulseSpec, t):
    """
    omega(t) = omega_idle + (omega_int - omega_idle)/4
               * (1 + erf((t - tau)/tau)) * (1 + erf((t_gate - t - tau)/tau))
    """
    t = np.asarray(t, dtype=float)
    rise = 1.0 + erf((t - pulse.tau) / pulse.tau)
    fall = 1.0 + erf((pulse.t_gate - t - pulse.tau) / pulse.tau)
    return pulse.omega_idle + pulse.amplitude / 4.0 * rise * fall


class CouplerBranch:
    """
    omega_c(phi_ext) tabulated on a monotone flux interval, inverted by a
    bracketed root search inside one table cell.
    """

    def __init__(
        self,
        spec: CouplerSpec,
        branch: Tuple[float, float] = DEFAULT_BRANCH,
        model: str = "exact",
        points: int = BRANCH_GRID_POINTS,
    ):
        self.spec = spec
        self.model = model
        self.branch = (float(branch[0]), float(branch[1]))
        self.phi = np.linspace(self.branch[0], self.branch[1], points)
        self.omega = np.array([coupler_frequency(spec, phi, model) for phi in self.phi])

        steps = np.diff(self.omega)
        if not (np.all(steps > 0) or np.all(steps < 0)):
            raise OutOfRegimeError(
                f"omega_c is not monotone on the flux branch [{branch[0]:.4f}, {branch[1]:.4f}] rad"
            )
        self._increasing = bool(steps[0] > 0)
        self._cache: Dict[float, float] = {}

    @property
    def omega_range(self) -> Tuple[float, float]:
        return float(self.omega.min()), float(self.omega.max())

    def frequency(self, phi: float) -> float:
        return coupler_frequency(self.spec, phi, self.model)

    def invert(self, omega_target: float) -> float:
        """
        Flux on the branch where omega_c equals omega_target.

        Raises:
            UnreachableFrequencyError: target outside the branch's range
        """
        omega_target = float(omega_target)
        if omega_target in self._cache:
            return self._cache[omega_target]

        low, high = self.omega_range
        if not low <= omega_target <= high:
            raise UnreachableFrequencyError(
                f"Target {omega_target / (2 * np.pi):.6f} GHz outside the coupler branch range "
                f"[{low / (2 * np.pi):.6f}, {high / (2 * np.pi):.6f}] GHz",
                target=omega_target,
                branch=self.branch,
            )

        ascending = self.omega if self._increasing else self.omega[::-1]
        k = int(np.searchsorted(ascending, omega_target))
        if k < len(ascending) and ascending[k] == omega_target:
            index = k if self._increasing else len(self.omega) - 1 - k
            phi = float(self.phi[index])
        else:
            if self._increasing:
                lo, hi = self.phi[k - 1], self.phi[k]
            else:
                n = len(self.omega)
                lo, hi = self.phi[n - 1 - k], self.phi[n - k]
            phi = float(brentq(lambda p: self.frequency(p) - omega_target, lo, hi, xtol=1e-13))

        self._cache[omega_target] = phi
        return phi


@dataclass
class FluxSchedule:
    """Sampled frequency targets and the fluxes that realize them."""

    times: np.ndarray
    omega: np.ndarray
    phi_ext: np.ndarray
    residual: float = 0.0


def flux_schedule(
    pulse: PulseSpec,
    branch: CouplerBranch,
    times: np.ndarray,
    check_residual: Optional[float] = None,
) -> FluxSchedule:
    """
    Convert a coupler frequency pulse into an external-flux trajectory.

    Args:
        pulse: Coupler pulse
        branch: Tabulated monotone branch of the coupler spectrum
        times: Sample times in ns
        check_residual: If given, re-evaluate omega_c at every flux and
            raise when the round trip misses by more than this (rad/ns)

    Raises:
        UnreachableFrequencyError: a sample lies outside the branch range
    """
    pulse.validate()
    times = np.asarray(times, dtype=float)
    omega = flattop(pulse, times)
    phi = np.array([branch.invert(w) for w in omega])

    residual = 0.0
    if check_residual is not None:
        achieved = np.array([branch.frequency(p) for p in phi])
        residual = float(np.max(np.abs(achieved - omega)))
        if residual > check_residual:
            raise UnreachableFrequencyError(
                f"Flux inversion residual {residual:.3e} rad/ns exceeds {check_residual:.3e}"
            )
    return FluxSchedule(times=times, omega=omega, phi_ext=phi, residual=residual)
