"""
Circuit model - lumped-element description to quantized mode parameters

Two flux-tunable transmons couple through a C-shunt flux coupler. The node
order is (phi_1, phi_1c, phi_2c, phi_2). An orthogonal basis change maps the
two coupler nodes onto a symmetric (+) and an antisymmetric (c) mode; the
+ mode carries no potential and is dropped after the charging-energy
matrix has been formed.
"""

import logging
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg
from scipy.optimize import brentq

from decoupler.circuit.coupler import (
    CouplerModeParams,
    CouplerSpec,
    TaylorCoefficients,
    coupler_mode,
    mode_params,
)
from decoupler.constants import CHARGING_GHZ_FF, EC_EJ_WARNING_RATIO, FEMTOFARAD, TWO_PI
from decoupler.errors import InvalidSpecError, SingularMatrixError, UnreachableFrequencyError

logger = logging.getLogger(__name__)

NODE_ORDER = ("1", "1c", "2c", "2")
MODE_ORDER = ("1", "+", "c", "2")
DIMER_MODES = ("q1", "c", "q2")

SQRT_HALF = 1.0 / np.sqrt(2.0)
BASIS_CHANGE = np.array(
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, SQRT_HALF, SQRT_HALF, 0.0],
        [0.0, SQRT_HALF, -SQRT_HALF, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]
)

# Largest condition number accepted for a capacitance matrix
MAX_CONDITION = 1e12

# Hierarchy ratio below which a capacitance pair counts as "much larger"
HIERARCHY_RATIO = 3.0


# ===== DOMAIN TYPES =====


@dataclass(frozen=True)
class TunableJunction:
    """Split transmon junction. Energies in rad/ns."""

    EJL: float
    EJR: float

    @property
    def asymmetry(self) -> float:
        return (self.EJL - self.EJR) / (self.EJL + self.EJR)

    def validate(self) -> None:
        if self.EJL <= 0 or self.EJR <= 0:
            raise InvalidSpecError(
                f"Junction energies must be positive (EJL={self.EJL:.4g}, EJR={self.EJR:.4g})"
            )


@dataclass(frozen=True)
class CircuitSpec:
    """
    Raw lumped-element description of the two-qubit circuit.

    Capacitances in farads, energies in rad/ns, fluxes in rad. Each qubit is
    given either by a target 0-1 frequency, by a tunable junction, or both;
    with a target the effective Josephson energy is calibrated to it and the
    junction only fixes the bias flux.
    """

    C1: float
    C2: float
    CC: float
    Cg: float
    C12: float
    C1c: float
    C2c: float
    EJc: float
    alpha: float
    phi_ext_c: float = np.pi
    junctions: Tuple[Optional[TunableJunction], Optional[TunableJunction]] = (None, None)
    qubit_targets: Tuple[Optional[float], Optional[float]] = (None, None)
    phi_ext_q: Tuple[float, float] = (0.0, 0.0)
    phi_cor: float = 0.0
    coupler_charging_scale: float = 1.0
    coupler_model: str = "exact"
    # zero C12, C1c, C2c are only accepted for a deliberately decoupled circuit
    uncoupled: bool = False

    @property
    def capacitances(self) -> Dict[str, float]:
        return {
            "C1": self.C1,
            "C2": self.C2,
            "CC": self.CC,
            "Cg": self.Cg,
            "C12": self.C12,
            "C1c": self.C1c,
            "C2c": self.C2c,
        }

    def with_updates(self, **changes) -> "CircuitSpec":
        return replace(self, **changes)

    def coupler_spec(self, EC: float) -> CouplerSpec:
        return CouplerSpec(
            EJ=self.EJc, alpha=self.alpha, EC=EC, phi_ext=self.phi_ext_c, phi_cor=self.phi_cor
        )

    def validate(self) -> List[str]:
        """
        Check hard invariants and return soft warnings.

        Raises:
            InvalidSpecError: non-positive capacitances (coupling capacitances may be
                zero with uncoupled=True), bad junctions or missing qubit data

        Returns:
            List of warning strings (capacitance hierarchy)
        """
        for name in ("C1", "C2", "CC", "Cg"):
            if not self.capacitances[name] > 0:
                raise InvalidSpecError(f"Capacitance {name} must be positive, got {self.capacitances[name]}")
        for name in ("C12", "C1c", "C2c"):
            value = self.capacitances[name]
            if not np.isfinite(value) or value < 0:
                raise InvalidSpecError(f"Capacitance {name} must be non-negative, got {value}")
            if value == 0 and not self.uncoupled:
                raise InvalidSpecError(
                    f"Coupling capacitance {name} must be positive; "
                    "mark the circuit uncoupled to allow zero"
                )
        if self.EJc <= 0:
            raise InvalidSpecError(f"Coupler junction energy must be positive, got {self.EJc}")
        if self.coupler_charging_scale <= 0:
            raise InvalidSpecError("coupler_charging_scale must be positive")

        for index, (junction, target) in enumerate(zip(self.junctions, self.qubit_targets), start=1):
            if junction is None and target is None:
                raise InvalidSpecError(f"Qubit {index} needs a target frequency or junction energies")
            if junction is not None:
                junction.validate()
            if target is not None and target <= 0:
                raise InvalidSpecError(f"Qubit {index} target frequency must be positive")

        warnings = []
        large = min(self.C1, self.C2, self.CC, self.Cg)
        medium = max(self.C1c, self.C2c)
        small_medium = min(self.C1c, self.C2c)
        if medium > 0 and large < HIERARCHY_RATIO * medium:
            warnings.append(
                f"Capacitance hierarchy C1,C2,CC,Cg >> C1c,C2c violated "
                f"({large / FEMTOFARAD:.3g} fF vs {medium / FEMTOFARAD:.3g} fF)"
            )
        if self.C12 > 0 and small_medium < HIERARCHY_RATIO * self.C12:
            warnings.append(
                f"Capacitance hierarchy C1c,C2c >> C12 violated "
                f"({small_medium / FEMTOFARAD:.3g} fF vs {self.C12 / FEMTOFARAD:.3g} fF)"
            )
        return warnings


@dataclass(frozen=True)
class CapacitanceMatrix:
    """Symmetric node capacitance matrix in farads."""

    values: np.ndarray
    transformed: bool = False
    labels: Tuple[str, ...] = NODE_ORDER


@dataclass(frozen=True)
class ChargingEnergyMatrix:
    """E_C = e^2/2 C'^-1 over the transformed modes, in rad/ns."""

    values: np.ndarray
    labels: Tuple[str, ...] = MODE_ORDER
    condition_number: float = 1.0
    dropped: Tuple[str, ...] = ("+",)

    def entry(self, a: str, b: str) -> float:
        return float(self.values[self.labels.index(a), self.labels.index(b)])


@dataclass(frozen=True, eq=False)
class DeviceParams:
    """
    Quantized mode parameters consumed by the spectral and dynamic code.

    Arrays are indexed by mode in the order of mode_names. Frequencies,
    anharmonicities, cubic coefficients and couplings are in rad/ns;
    couplings are signed and symmetric with zero diagonal.
    """

    mode_names: Tuple[str, ...]
    omega: np.ndarray
    anharmonicity: np.ndarray
    cubic: np.ndarray
    n_zpf: np.ndarray
    phi_zpf: np.ndarray
    coupling: np.ndarray
    coupler_flux: Tuple[float, ...] = ()
    warnings: Tuple[str, ...] = ()

    @property
    def n_modes(self) -> int:
        return len(self.mode_names)

    def index(self, name: str) -> int:
        return self.mode_names.index(name)

    def g(self, a: str, b: str) -> float:
        return float(self.coupling[self.index(a), self.index(b)])

    def frequency(self, name: str) -> float:
        return float(self.omega[self.index(name)])

    def anharmonicity_of(self, name: str) -> float:
        return float(self.anharmonicity[self.index(name)])

    def scaled_couplings(self, factor: float) -> "DeviceParams":
        """Copy with every coupling multiplied by factor."""
        return replace(self, coupling=self.coupling * factor)

    def with_mode(self, name: str, **values) -> "DeviceParams":
        """Copy with per-mode entries replaced, e.g. with_mode("c", omega=..., anharmonicity=...)."""
        i = self.index(name)
        changes = {}
        for key, value in values.items():
            array = np.array(getattr(self, key), dtype=float)
            array[i] = value
            changes[key] = array
        return replace(self, **changes)

    def with_coupling(self, a: str, b: str, value: float) -> "DeviceParams":
        coupling = np.array(self.coupling, dtype=float)
        i, j = self.index(a), self.index(b)
        coupling[i, j] = coupling[j, i] = value
        return replace(self, coupling=coupling)

    def as_table(self) -> List[Dict[str, object]]:
        """Flat rows for printing: one per mode, then one per nonzero coupling."""
        rows = []
        for i, name in enumerate(self.mode_names):
            rows.append(
                {
                    "quantity": f"mode {name}",
                    "omega_GHz": self.omega[i] / TWO_PI,
                    "U_MHz": self.anharmonicity[i] / TWO_PI * 1e3,
                    "K_MHz": self.cubic[i] / TWO_PI * 1e3,
                    "n_zpf": self.n_zpf[i],
                    "phi_zpf": self.phi_zpf[i],
                }
            )
        for i in range(self.n_modes):
            for j in range(i + 1, self.n_modes):
                rows.append(
                    {
                        "quantity": f"g {self.mode_names[i]}-{self.mode_names[j]}",
                        "g_MHz": self.coupling[i, j] / TWO_PI * 1e3,
                    }
                )
        return rows


# ===== OPERATIONS =====


def build_capacitance_matrix(spec: CircuitSpec) -> CapacitanceMatrix:
    """
    Assemble the 4x4 node capacitance matrix.

    Raises:
        InvalidSpecError: non-positive shunt or coupler capacitances
    """
    spec.validate()
    C1, C2, CC, Cg = spec.C1, spec.C2, spec.CC, spec.Cg
    C12, C1c, C2c = spec.C12, spec.C1c, spec.C2c

    values = np.array(
        [
            [C1 + C1c + C12, -C1c, 0.0, -C12],
            [-C1c, C1c + Cg + CC, -CC, 0.0],
            [0.0, -CC, C2c + CC + Cg, -C2c],
            [-C12, 0.0, -C2c, C2 + C2c + C12],
        ]
    )
    return CapacitanceMatrix(values=values)


def invert_capacitance(values: np.ndarray) -> Tuple[np.ndarray, float]:
    """
    Convert a capacitance matrix (farads) to charging energies in rad/ns.

    Raises:
        SingularMatrixError: condition number above MAX_CONDITION
    """
    condition = float(np.linalg.cond(values))
    if not np.isfinite(condition) or condition > MAX_CONDITION:
        raise SingularMatrixError(
            f"Capacitance matrix is singular or ill-conditioned (cond={condition:.3e})",
            condition_number=condition,
        )
    try:
        inverse = linalg.inv(values)
    except linalg.LinAlgError as e:
        raise SingularMatrixError(f"Capacitance inversion failed: {e}", condition_number=condition)

    # e^2/(2h) C^-1 with C in fF gives GHz
    energies = TWO_PI * CHARGING_GHZ_FF * inverse * FEMTOFARAD
    return 0.5 * (energies + energies.T), condition


def transform_and_invert(C: CapacitanceMatrix) -> ChargingEnergyMatrix:
    """
    Apply the orthogonal basis change and invert.

    Returns:
        ChargingEnergyMatrix over (1, +, c, 2); the + row/column is kept but
        marked as dropped

    Raises:
        SingularMatrixError: ill-conditioned matrix
    """
    values = C.values if C.transformed else BASIS_CHANGE @ C.values @ BASIS_CHANGE.T
    energies, condition = invert_capacitance(values)
    return ChargingEnergyMatrix(values=energies, condition_number=condition)


def effective_qubit_EJ(junction: TunableJunction, phi_ext: float) -> float:
    """Effective Josephson energy of a split junction at reduced flux phi_ext."""
    half = phi_ext / 2.0
    return float(
        (junction.EJL + junction.EJR)
        * np.sqrt(np.cos(half) ** 2 + junction.asymmetry**2 * np.sin(half) ** 2)
    )


def transmon_frequency(EC: float, EJ: float) -> float:
    """0-1 transition sqrt(8 EC EJ) - EC."""
    return float(np.sqrt(8.0 * EC * EJ) - EC)


def calibrate_qubit_EJ(EC: float, omega_target: float) -> float:
    """
    Effective Josephson energy that puts the 0-1 transition at omega_target.

    sqrt(8 EC EJ) - EC = omega is monotone in EJ and inverts in closed form.
    """
    if omega_target + EC <= 0:
        raise UnreachableFrequencyError(
            f"Target {omega_target / TWO_PI:.4f} GHz is below the charging energy limit",
            target=omega_target,
        )
    return float((omega_target + EC) ** 2 / (8.0 * EC))


def qubit_flux_for_frequency(junction: TunableJunction, EC: float, omega_target: float) -> float:
    """
    Bias flux in [0, pi] that tunes a split transmon to omega_target.

    Raises:
        UnreachableFrequencyError: target outside [omega(pi), omega(0)]
    """

    def residual(phi: float) -> float:
        return transmon_frequency(EC, effective_qubit_EJ(junction, phi)) - omega_target

    top, bottom = residual(0.0), residual(np.pi)
    if top == 0.0:
        return 0.0
    if np.sign(top) == np.sign(bottom):
        raise UnreachableFrequencyError(
            f"Qubit target {omega_target / TWO_PI:.4f} GHz outside the tunable range "
            f"[{(bottom + omega_target) / TWO_PI:.4f}, {(top + omega_target) / TWO_PI:.4f}] GHz",
            target=omega_target,
            branch=(0.0, np.pi),
        )
    return float(brentq(residual, 0.0, np.pi, xtol=1e-14))


def quantize_modes(
    E_C: ChargingEnergyMatrix,
    qubit_EJs: Sequence[float],
    coupler_coeffs: Optional[TaylorCoefficients],
    coupler: Optional[CouplerModeParams] = None,
    coupler_charging_scale: float = 1.0,
) -> DeviceParams:
    """
    Quantize the dimer as Duffing oscillators with capacitive couplings.

    Args:
        E_C: Charging-energy matrix over (1, +, c, 2)
        qubit_EJs: Effective Josephson energies of qubit 1 and 2
        coupler_coeffs: Taylor expansion of the coupler potential
        coupler: Precomputed coupler mode (overrides coupler_coeffs)
        coupler_charging_scale: Multiplier on E_C,cc

    Returns:
        DeviceParams over modes (q1, c, q2); warnings carry E_C/E_J violations
    """
    EC = E_C.values
    idx = {"q1": E_C.labels.index("1"), "c": E_C.labels.index("c"), "q2": E_C.labels.index("2")}
    EC_cc = EC[idx["c"], idx["c"]] * coupler_charging_scale

    if coupler is None:
        if coupler_coeffs is None:
            raise ValueError("quantize_modes needs coupler_coeffs or a coupler mode")
        coupler = mode_params(coupler_coeffs, EC_cc)

    warnings = []
    omega = np.zeros(3)
    anharmonicity = np.zeros(3)
    cubic = np.zeros(3)
    n_zpf = np.zeros(3)
    phi_zpf = np.zeros(3)

    for slot, (name, EJ) in enumerate(zip(("q1", "q2"), qubit_EJs)):
        i = DIMER_MODES.index(name)
        EC_ii = EC[idx[name], idx[name]]
        ratio = EC_ii / EJ
        if ratio > EC_EJ_WARNING_RATIO:
            message = f"E_C/E_J = {ratio:.3f} for {name} exceeds {EC_EJ_WARNING_RATIO}"
            logger.warning(message)
            warnings.append(message)
        anharmonicity[i] = -EC_ii
        omega[i] = np.sqrt(8.0 * EC_ii * EJ) + anharmonicity[i]
        n_zpf[i] = (EJ / (32.0 * EC_ii)) ** 0.25
        phi_zpf[i] = (2.0 * EC_ii / EJ) ** 0.25

    c = DIMER_MODES.index("c")
    omega[c] = coupler.omega
    anharmonicity[c] = coupler.anharmonicity
    cubic[c] = coupler.cubic
    n_zpf[c] = coupler.n_zpf
    phi_zpf[c] = coupler.phi_zpf

    coupling = np.zeros((3, 3))
    for a in range(3):
        for b in range(a + 1, 3):
            value = 8.0 * EC[idx[DIMER_MODES[a]], idx[DIMER_MODES[b]]] * n_zpf[a] * n_zpf[b]
            coupling[a, b] = coupling[b, a] = value

    return DeviceParams(
        mode_names=DIMER_MODES,
        omega=omega,
        anharmonicity=anharmonicity,
        cubic=cubic,
        n_zpf=n_zpf,
        phi_zpf=phi_zpf,
        coupling=coupling,
        warnings=tuple(warnings),
    )


class CircuitModel:
    """
    Flux-independent part of the dimer, cached.

    The charging-energy matrix and qubit Josephson energies are computed once;
    params_at() adds the coupler at any external flux.
    """

    def __init__(self, spec: CircuitSpec):
        self.spec = spec
        self.warnings = spec.validate()
        for message in self.warnings:
            logger.warning(message)

        self.capacitance = build_capacitance_matrix(spec)
        self.charging = transform_and_invert(self.capacitance)
        self.EC_cc = self.charging.entry("c", "c") * spec.coupler_charging_scale
        self.qubit_EJs = tuple(
            self._qubit_EJ(i, target) for i, target in enumerate(spec.qubit_targets)
        )

    def _qubit_EJ(self, slot: int, target: Optional[float]) -> float:
        label = ("1", "2")[slot]
        EC = self.charging.entry(label, label)
        if target is not None:
            return calibrate_qubit_EJ(EC, target)
        return effective_qubit_EJ(self.spec.junctions[slot], self.spec.phi_ext_q[slot])

    @property
    def coupler_spec(self) -> CouplerSpec:
        return self.spec.coupler_spec(self.EC_cc)

    def qubit_bias_flux(self) -> Tuple[Optional[float], Optional[float]]:
        """Bias flux per qubit when both a junction and a target are configured."""
        fluxes = []
        for slot, (junction, target) in enumerate(zip(self.spec.junctions, self.spec.qubit_targets)):
            label = ("1", "2")[slot]
            if junction is None or target is None:
                fluxes.append(None)
            else:
                fluxes.append(qubit_flux_for_frequency(junction, self.charging.entry(label, label), target))
        return tuple(fluxes)

    def coupler_at(self, phi_ext: float) -> CouplerModeParams:
        return coupler_mode(self.coupler_spec.at_flux(phi_ext), self.spec.coupler_model)

    def params_at(
        self,
        phi_ext: Optional[float] = None,
        qubit_targets: Optional[Sequence[Optional[float]]] = None,
    ) -> DeviceParams:
        """
        DeviceParams with the coupler at phi_ext.

        Args:
            phi_ext: Coupler flux in rad (defaults to the CircuitSpec's)
            qubit_targets: Per-qubit frequency overrides in rad/ns; None keeps the calibrated value
        """
        if phi_ext is None:
            phi_ext = self.spec.phi_ext_c
        EJs = list(self.qubit_EJs)
        if qubit_targets is not None:
            for slot, target in enumerate(qubit_targets):
                if target is not None:
                    label = ("1", "2")[slot]
                    EJs[slot] = calibrate_qubit_EJ(self.charging.entry(label, label), target)

        params = quantize_modes(
            self.charging,
            EJs,
            coupler_coeffs=None,
            coupler=self.coupler_at(phi_ext),
            coupler_charging_scale=self.spec.coupler_charging_scale,
        )
        return replace(
            params,
            coupler_flux=(float(phi_ext),),
            warnings=tuple(self.warnings) + params.warnings,
        )


def derive_device_params(spec: CircuitSpec) -> DeviceParams:
    """Full pipeline from circuit description to DeviceParams at the CircuitSpec's coupler flux."""
    return CircuitModel(spec).params_at()
