"""
C-shunt flux coupler - potential landscape and mode parameters versus flux

The coupler coordinate phi is the antisymmetric combination of the two
coupler nodes. Its potential is

    V(phi) = -2 E_J cos(phi / sqrt2) - alpha E_J cos(sqrt2 phi + phi_ext)

which is periodic in phi with period 2 pi sqrt2. In the single-well window
1/8 < alpha < 1/2 the minimum is unique; it is located numerically, the
potential is expanded to fourth order around it, and the expansion is
quantized as a Duffing oscillator with a cubic correction.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg
from scipy.optimize import brentq

from decoupler.constants import (
    ALPHA_MAX,
    ALPHA_MIN,
    MINIMUM_GRID_POINTS,
    STATIONARITY_TOLERANCE,
)
from decoupler.errors import (
    MultiWellError,
    OutOfRegimeError,
    RegimeError,
    UnreachableFrequencyError,
)

logger = logging.getLogger(__name__)

SQRT2 = np.sqrt(2.0)
PERIOD = 2.0 * np.pi * SQRT2

COUPLER_MODELS = ("taylor", "exact")

# Plane waves exp(i m phi / sqrt2) kept on each side of m = 0 by the exact model
CHARGE_CUTOFF = 40


@dataclass(frozen=True)
class CouplerSpec:
    """Coupler junction data at one flux point. Energies in rad/ns."""

    EJ: float  # upper-branch junction energy in the antisymmetric basis
    alpha: float  # lower/upper junction ratio
    EC: float  # E_C,cc of the coupler mode
    phi_ext: float  # reduced external flux, rad
    phi_cor: float = 0.0  # correction SQUID flux, rad

    @property
    def alpha_eff(self) -> float:
        """Junction ratio after the correction SQUID rescaling."""
        return self.alpha * np.cos(self.phi_cor / 2.0)

    def at_flux(self, phi_ext: float) -> "CouplerSpec":
        return replace(self, phi_ext=float(phi_ext))

    def validate(self) -> None:
        """Raise OutOfRegimeError outside the single-well window."""
        if self.EJ <= 0 or self.EC <= 0:
            raise OutOfRegimeError(
                f"Coupler energies must be positive (EJ={self.EJ:.4g}, EC={self.EC:.4g})"
            )
        if not ALPHA_MIN < self.alpha_eff < ALPHA_MAX:
            raise OutOfRegimeError(
                f"Effective alpha {self.alpha_eff:.4f} outside the single-well window "
                f"({ALPHA_MIN}, {ALPHA_MAX})"
            )


@dataclass(frozen=True)
class TaylorCoefficients:
    """Expansion V ~ V_min + c2 x^2 + c3 x^3 + c4 x^4 around phi_min."""

    phi_min: float
    c2: float
    c3: float
    c4: float
    v_min: float = 0.0


@dataclass(frozen=True)
class CouplerModeParams:
    """Quantized coupler mode. Frequencies in rad/ns."""

    omega: float
    anharmonicity: float
    cubic: float
    phi_zpf: float
    n_zpf: float
    omega_harmonic: float = float("nan")


def potential(phi, spec: CouplerSpec):
    """Coupler potential V(phi) in the units of spec.EJ."""
    phi = np.asarray(phi, dtype=float)
    return -2.0 * spec.EJ * np.cos(phi / SQRT2) - spec.alpha_eff * spec.EJ * np.cos(
        SQRT2 * phi + spec.phi_ext
    )


def stationarity(phi, spec: CouplerSpec):
    """sin(phi/sqrt2) + alpha sin(sqrt2 phi + phi_ext); dV/dphi = sqrt2 EJ times this."""
    return np.sin(phi / SQRT2) + spec.alpha_eff * np.sin(SQRT2 * phi + spec.phi_ext)


def _stationarity_slope(phi, spec: CouplerSpec):
    return np.cos(phi / SQRT2) / SQRT2 + SQRT2 * spec.alpha_eff * np.cos(
        SQRT2 * phi + spec.phi_ext
    )


def curvature(phi, spec: CouplerSpec):
    """Second derivative of the potential."""
    return spec.EJ * (np.cos(phi / SQRT2) + 2.0 * spec.alpha_eff * np.cos(SQRT2 * phi + spec.phi_ext))


def _wrap(phi: float) -> float:
    """Map phi into [-pi sqrt2, pi sqrt2)."""
    return float((phi + PERIOD / 2.0) % PERIOD - PERIOD / 2.0)


def find_minimum(
    spec: CouplerSpec, grid_points: int = MINIMUM_GRID_POINTS, check_regime: bool = True
) -> float:
    """
    Locate the global minimum of the coupler potential.

    A periodic grid over one period brackets every sign change of the
    stationarity function from negative to positive (a minimum). Exactly one
    such bracket is accepted; it is solved with Brent's method and polished
    with Newton steps.

    Args:
        spec: Coupler at a fixed external flux
        grid_points: Bracketing grid size
        check_regime: Enforce the single-well alpha window first

    Returns:
        phi_min in [-pi sqrt2, pi sqrt2)

    Raises:
        OutOfRegimeError: alpha outside the window or non-positive curvature
        MultiWellError: zero or several minima on the grid
    """
    if check_regime:
        spec.validate()

    # endpoint excluded so the grid is periodic and contains phi = 0 exactly
    grid = np.linspace(-PERIOD / 2.0, PERIOD / 2.0, grid_points, endpoint=False)
    values = stationarity(grid, spec)
    nxt = np.roll(values, -1)
    starts = np.nonzero((values < 0.0) & (nxt >= 0.0))[0]

    if len(starts) != 1:
        brackets = [(float(grid[k]), float(grid[k] + PERIOD / grid_points)) for k in starts]
        raise MultiWellError(
            f"Expected a single potential minimum at phi_ext={spec.phi_ext:.6f}, "
            f"found {len(starts)} brackets",
            brackets=brackets,
        )

    k = int(starts[0])
    left = float(grid[k])
    right = left + PERIOD / grid_points  # wraps past the end for the last cell

    if stationarity(right, spec) == 0.0:
        root = right
    else:
        root = brentq(stationarity, left, right, args=(spec,), xtol=1e-15, rtol=1e-15, maxiter=200)

    for _ in range(3):
        residual = stationarity(root, spec)
        if abs(residual) < STATIONARITY_TOLERANCE * 1e-2:
            break
        root -= residual / _stationarity_slope(root, spec)

    residual = abs(float(stationarity(root, spec)))
    if residual > STATIONARITY_TOLERANCE:
        raise MultiWellError(f"Minimum polish did not converge (residual {residual:.2e})")

    root = _wrap(root)
    if curvature(root, spec) <= 0.0:
        raise OutOfRegimeError(
            f"Non-positive curvature at the coupler minimum (phi_ext={spec.phi_ext:.6f})"
        )
    return root


def taylor_coefficients(spec: CouplerSpec, phi_min: Optional[float] = None) -> TaylorCoefficients:
    """
    Expand the coupler potential to fourth order around its minimum.

    Args:
        spec: Coupler at a fixed external flux
        phi_min: Expansion point; located with find_minimum when omitted

    Returns:
        TaylorCoefficients with c2, c3, c4 in the units of spec.EJ
    """
    if phi_min is None:
        phi_min = find_minimum(spec)

    EJ = spec.EJ
    alpha = spec.alpha_eff
    inner = phi_min / SQRT2
    outer = SQRT2 * phi_min + spec.phi_ext

    c2 = EJ / 2.0 * (np.cos(inner) + 2.0 * alpha * np.cos(outer))
    c3 = -EJ / 6.0 * (np.sin(inner) / SQRT2 + 2.0 * SQRT2 * alpha * np.sin(outer))
    c4 = -EJ / 24.0 * (0.5 * np.cos(inner) + 4.0 * alpha * np.cos(outer))

    return TaylorCoefficients(
        phi_min=float(phi_min),
        c2=float(c2),
        c3=float(c3),
        c4=float(c4),
        v_min=float(potential(phi_min, spec)),
    )


def mode_params(coeffs: TaylorCoefficients, EC: float) -> CouplerModeParams:
    """
    Quantize the expanded coupler as a Duffing oscillator.

    With stiffness E = 2 c2 the harmonic frequency is sqrt(8 EC E); the
    normal-ordered quartic and cubic terms give U = 12 c4 phi_zpf^4 and
    K = 3 c3 phi_zpf^3.

    Raises:
        OutOfRegimeError: c2 <= 0
    """
    if coeffs.c2 <= 0.0:
        raise OutOfRegimeError(f"Non-positive quadratic coefficient c2={coeffs.c2:.4g}")

    stiffness = 2.0 * coeffs.c2
    phi_zpf = (2.0 * EC / stiffness) ** 0.25
    n_zpf = (stiffness / (32.0 * EC)) ** 0.25
    omega_h = np.sqrt(8.0 * EC * stiffness)
    anharmonicity = 12.0 * coeffs.c4 * phi_zpf**4
    cubic = 3.0 * coeffs.c3 * phi_zpf**3

    return CouplerModeParams(
        omega=float(omega_h + anharmonicity),
        anharmonicity=float(anharmonicity),
        cubic=float(cubic),
        phi_zpf=float(phi_zpf),
        n_zpf=float(n_zpf),
        omega_harmonic=float(omega_h),
    )


def exact_mode_params(spec: CouplerSpec, charge_cutoff: int = CHARGE_CUTOFF) -> CouplerModeParams:
    """
    Single-mode diagonalization of the full cosine potential.

    The Hamiltonian 4 EC n^2 + V(phi) is written in the plane waves
    exp(i m phi / sqrt2), |m| <= charge_cutoff, which are periodic over one
    period of the potential, so the single well is represented exactly once.
    The kinetic term is diagonal (2 EC m^2); cos(phi / sqrt2) couples m to
    m +- 1 and cos(sqrt2 phi + phi_ext) couples m to m +- 2. Frequency and
    anharmonicity come from the three lowest levels; the zero-point
    fluctuations are those of the expansion, and the cubic term is absorbed
    into the levels (returned as 0).

    Raises:
        OutOfRegimeError: alpha outside the single-well window
        MultiWellError: no unique minimum
    """
    coeffs = taylor_coefficients(spec)
    duffing = mode_params(coeffs, spec.EC)

    m = np.arange(-charge_cutoff, charge_cutoff + 1)
    hamiltonian = np.diag(2.0 * spec.EC * m**2).astype(complex)
    hamiltonian += np.diag(np.full(len(m) - 1, -spec.EJ), k=1)
    hamiltonian += np.diag(np.full(len(m) - 1, -spec.EJ), k=-1)
    # <m+2|V|m> = -alpha EJ exp(i phi_ext) / 2
    shift = -0.5 * spec.alpha_eff * spec.EJ * np.exp(1j * spec.phi_ext)
    hamiltonian += np.diag(np.full(len(m) - 2, shift), k=-2)
    hamiltonian += np.diag(np.full(len(m) - 2, np.conj(shift)), k=2)

    levels = linalg.eigh(hamiltonian, eigvals_only=True, subset_by_index=[0, 2])
    omega = levels[1] - levels[0]
    anharmonicity = (levels[2] - levels[1]) - omega

    return CouplerModeParams(
        omega=float(omega),
        anharmonicity=float(anharmonicity),
        cubic=0.0,
        phi_zpf=duffing.phi_zpf,
        n_zpf=duffing.n_zpf,
        omega_harmonic=duffing.omega_harmonic,
    )


def coupler_mode(spec: CouplerSpec, model: str = "taylor") -> CouplerModeParams:
    """Coupler mode parameters with the configured model."""
    if model == "taylor":
        return mode_params(taylor_coefficients(spec), spec.EC)
    if model == "exact":
        return exact_mode_params(spec)
    raise ValueError(f"Unknown coupler model: '{model}'. Available models: {', '.join(COUPLER_MODELS)}")


@dataclass
class FluxSweep:
    """Coupler parameters along a flux sweep. Out-of-regime points are NaN with valid=False."""

    phi_ext: np.ndarray
    omega: np.ndarray
    anharmonicity: np.ndarray
    cubic: np.ndarray
    phi_min: np.ndarray
    valid: np.ndarray
    omega_exact: Optional[np.ndarray] = None
    anharmonicity_exact: Optional[np.ndarray] = None
    notes: List[str] = field(default_factory=list)

    def rows(self) -> List[Dict[str, float]]:
        """CSV rows in output units; oracle columns only when the oracle ran."""
        out = []
        for i, phi in enumerate(self.phi_ext):
            row = {
                "phi_ext_over_Phi0": phi / (2.0 * np.pi),
                "omega_c_GHz": self.omega[i] / (2.0 * np.pi),
                "U_c_MHz": self.anharmonicity[i] / (2.0 * np.pi) * 1e3,
                "K_c_MHz": self.cubic[i] / (2.0 * np.pi) * 1e3,
                "phi_min_rad": self.phi_min[i],
            }
            if self.omega_exact is not None:
                row["omega_c_exact_GHz"] = self.omega_exact[i] / (2.0 * np.pi)
                row["U_c_exact_MHz"] = self.anharmonicity_exact[i] / (2.0 * np.pi) * 1e3
            out.append(row)
        return out

    def monotone_segments(self) -> List[Tuple[int, int]]:
        """Index ranges [start, stop] over which omega is strictly monotone."""
        segments = []
        idx = np.nonzero(self.valid)[0]
        if len(idx) < 2:
            return segments
        start = idx[0]
        direction = 0
        for a, b in zip(idx[:-1], idx[1:]):
            if b != a + 1:
                if a > start:
                    segments.append((int(start), int(a)))
                start, direction = b, 0
                continue
            step = np.sign(self.omega[b] - self.omega[a])
            if direction == 0:
                direction = step
            elif step != direction or step == 0:
                segments.append((int(start), int(a)))
                start, direction = a, step
        if idx[-1] > start:
            segments.append((int(start), int(idx[-1])))
        return segments


def _sweep_point(spec: CouplerSpec, phi: float, oracle: bool):
    at = spec.at_flux(phi)
    coeffs = taylor_coefficients(at)
    mode = mode_params(coeffs, at.EC)
    exact = exact_mode_params(at) if oracle else None
    return coeffs.phi_min, mode, exact


def spectrum_vs_flux(
    spec: CouplerSpec,
    phi_grid: Sequence[float],
    oracle: bool = False,
    threads: int = 1,
) -> FluxSweep:
    """
    Sweep the external flux and collect coupler frequency, anharmonicity and
    cubic coefficient at every point.

    Args:
        spec: Coupler description (its phi_ext is ignored)
        phi_grid: External flux values in rad
        oracle: Also run the exact single-mode diagonalization
        threads: Worker threads for the sweep

    Returns:
        FluxSweep with the same ordering as phi_grid
    """
    from decoupler.parallel import ordered_map

    phi_grid = np.asarray(phi_grid, dtype=float)
    count = len(phi_grid)
    sweep = FluxSweep(
        phi_ext=phi_grid,
        omega=np.full(count, np.nan),
        anharmonicity=np.full(count, np.nan),
        cubic=np.full(count, np.nan),
        phi_min=np.full(count, np.nan),
        valid=np.zeros(count, dtype=bool),
        omega_exact=np.full(count, np.nan) if oracle else None,
        anharmonicity_exact=np.full(count, np.nan) if oracle else None,
    )

    def task(phi):
        try:
            return _sweep_point(spec, phi, oracle)
        except RegimeError as e:
            return e

    for i, result in enumerate(ordered_map(task, phi_grid, threads=threads, desc="coupler sweep")):
        if isinstance(result, RegimeError):
            sweep.notes.append(f"phi_ext={phi_grid[i]:.6f}: {result}")
            continue
        phi_min, mode, exact = result
        sweep.phi_min[i] = phi_min
        sweep.omega[i] = mode.omega
        sweep.anharmonicity[i] = mode.anharmonicity
        sweep.cubic[i] = mode.cubic
        sweep.valid[i] = True
        if exact is not None:
            sweep.omega_exact[i] = exact.omega
            sweep.anharmonicity_exact[i] = exact.anharmonicity

    if sweep.notes:
        logger.warning(f"{len(sweep.notes)} of {count} sweep points are out of regime")
    return sweep


def coupler_frequency(spec: CouplerSpec, phi_ext: float, model: str = "taylor") -> float:
    """Coupler transition frequency at a given external flux."""
    return coupler_mode(spec.at_flux(phi_ext), model).omega


def frequency_to_flux(
    spec: CouplerSpec,
    omega_target: float,
    branch: Tuple[float, float] = (0.0, np.pi),
    model: str = "taylor",
    xtol: float = 1e-13,
) -> float:
    """
    Invert omega_c(phi_ext) on a monotone branch.

    Args:
        spec: Coupler description
        omega_target: Target frequency in rad/ns
        branch: Flux interval on which omega_c is monotone
        model: Coupler model
        xtol: Absolute flux tolerance of the root finder

    Returns:
        phi_ext on the branch with omega_c(phi_ext) = omega_target

    Raises:
        UnreachableFrequencyError: target outside the branch's frequency range
    """
    lo, hi = branch
    f_lo = coupler_frequency(spec, lo, model) - omega_target
    f_hi = coupler_frequency(spec, hi, model) - omega_target

    if f_lo == 0.0:
        return float(lo)
    if f_hi == 0.0:
        return float(hi)
    if np.sign(f_lo) == np.sign(f_hi):
        low_end, high_end = sorted((f_lo + omega_target, f_hi + omega_target))
        raise UnreachableFrequencyError(
            f"Target {omega_target / (2 * np.pi):.6f} GHz outside the branch range "
            f"[{low_end / (2 * np.pi):.6f}, {high_end / (2 * np.pi):.6f}] GHz",
            target=omega_target,
            branch=branch,
        )

    return float(
        brentq(
            lambda phi: coupler_frequency(spec, phi, model) - omega_target,
            lo,
            hi,
            xtol=xtol,
            maxiter=200,
        )
    )
