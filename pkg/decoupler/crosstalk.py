"""
Crosstalk metrics - ZZ coupling, delocalization and effective coupling

Exact quantities come from the labeled spectrum of the full Hamiltonian.
Closed forms are the dispersive perturbation theory of the two-qubit plus
coupler system; they take RWA-convention couplings, so differences of a
few MHz against the exact numerics (which keep counter-rotating terms) are
expected.

Signs: Delta_ij = omega_i - omega_j, Sigma_ij = omega_i + omega_j,
zeta = E_11 - E_10 - E_01 + E_00 and epsilon uses squared overlaps.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from decoupler.circuit.model import DeviceParams
from decoupler.constants import POLE_TOLERANCE, TWO_PI
from decoupler.errors import (
    DegenerateCouplingError,
    DivergentSweetSpotError,
    LabelingError,
    PoleError,
)
from decoupler.fock import (
    HamiltonianAssembler,
    LabeledSpectrum,
    TruncationPolicy,
    build_hamiltonian,
    computational_labels,
    diagonalize,
    label_states,
)

logger = logging.getLogger(__name__)

# |g/Delta| above which the dispersive closed forms are flagged
DISPERSIVE_RATIO = 0.1

# |g_12| (rad/ns) below which the direct coupling counts as absent
DEGENERATE_COUPLING = 1e-12


# ===== DOMAIN TYPES =====


@dataclass(frozen=True)
class DetuningSet:
    """Detunings and sums of a qubit pair and its coupler, rad/ns."""

    d1c: float
    d2c: float
    s1c: float
    s2c: float
    s12: float

    @property
    def d12(self) -> float:
        # defined through the coupler detunings so d12 == d1c - d2c holds exactly
        return self.d1c - self.d2c

    @property
    def d21(self) -> float:
        return -self.d12

    @classmethod
    def from_frequencies(cls, w1: float, w2: float, wc: float) -> "DetuningSet":
        return cls(d1c=w1 - wc, d2c=w2 - wc, s1c=w1 + wc, s2c=w2 + wc, s12=w1 + w2)

    @classmethod
    def from_params(
        cls, params: DeviceParams, qubits: Tuple[str, str] = ("q1", "q2"), coupler: str = "c"
    ) -> "DetuningSet":
        return cls.from_frequencies(
            params.frequency(qubits[0]), params.frequency(qubits[1]), params.frequency(coupler)
        )


@dataclass(frozen=True)
class PairLabels:
    """Bare labels 00, 10, 01, 11 of a qubit pair, every other mode in its ground state."""

    ground: Tuple[int, ...]
    first: Tuple[int, ...]
    second: Tuple[int, ...]
    both: Tuple[int, ...]

    @classmethod
    def for_pair(cls, mode_names: Sequence[str], a: str, b: str) -> "PairLabels":
        slots = (list(mode_names).index(a), list(mode_names).index(b))
        return cls(*computational_labels(len(mode_names), slots))

    @classmethod
    def default(cls, mode_names: Sequence[str]) -> "PairLabels":
        """First and last mode, which is (q1, q2) for the dimer."""
        return cls.for_pair(mode_names, mode_names[0], mode_names[-1])

    def all(self) -> List[Tuple[int, ...]]:
        return [self.ground, self.first, self.second, self.both]


@dataclass(frozen=True)
class ZZComponents:
    """Second-, third- and fourth-order contributions to zeta, rad/ns."""

    zeta2: float
    zeta3: float
    zeta4: float

    @property
    def total(self) -> float:
        return self.zeta2 + self.zeta3 + self.zeta4


@dataclass(frozen=True)
class EffectiveCoupling:
    """Schrieffer-Wolff coupling between the dressed qubits."""

    value: float
    rwa_value: float
    omega_dressed: Tuple[float, float]
    dispersive: bool = True


@dataclass(frozen=True)
class GeffZeros:
    """
    Coupler frequencies at which the RWA effective coupling vanishes.

    chosen follows the sign of g_12 g_1c g_2c (+: above the qubits, -: below).
    full is the zero of the coupling including the Sigma terms on the chosen
    side, or None when it has none.
    """

    plus: float
    minus: float
    chosen: float
    branch: str
    epsilon_plus: float
    epsilon_minus: float
    full: Optional[float] = None


@dataclass
class CrosstalkReport:
    """Exact and perturbative crosstalk at one operating point. Frequencies in rad/ns."""

    zeta_exact: float
    epsilon_exact: float
    zeta_perturbative: Optional[ZZComponents] = None
    epsilon_perturbative: Optional[float] = None
    g_eff: Optional[float] = None
    omega_c: float = float("nan")
    phi_ext: float = float("nan")
    flags: List[str] = field(default_factory=list)

    def as_row(self) -> Dict[str, float]:
        """CSV row in output units."""
        nan = float("nan")
        return {
            "phi_ext": self.phi_ext,
            "omega_c_GHz": self.omega_c / TWO_PI,
            "zeta_exact_kHz": self.zeta_exact / TWO_PI * 1e6,
            "zeta_pert_kHz": (
                self.zeta_perturbative.total / TWO_PI * 1e6 if self.zeta_perturbative else nan
            ),
            "epsilon": self.epsilon_exact,
            "epsilon_pert": nan if self.epsilon_perturbative is None else self.epsilon_perturbative,
            "g_eff_MHz": nan if self.g_eff is None else self.g_eff / TWO_PI * 1e3,
        }


# ===== EXACT METRICS =====


def dressed_spectrum(
    params: DeviceParams,
    trunc: TruncationPolicy,
    pair: Optional[PairLabels] = None,
    rwa: bool = False,
    solver: str = "auto",
    assembler: Optional[HamiltonianAssembler] = None,
    extra_labels: Sequence[Sequence[int]] = (),
) -> LabeledSpectrum:
    """Build, diagonalize and label the pair's computational states."""
    pair = pair or PairLabels.default(params.mode_names)
    H = build_hamiltonian(params, trunc, rwa=rwa, assembler=assembler)
    spectrum = diagonalize(H, solver=solver, k=trunc.eigenpairs)
    return label_states(spectrum, pair.all() + list(extra_labels), threshold=trunc.overlap_threshold)


def zz_exact(spectrum: LabeledSpectrum, pair: Optional[PairLabels] = None) -> float:
    """zeta = E_11 - E_10 - E_01 + E_00 from labeled eigenvalues."""
    pair = pair or PairLabels.default(spectrum.spectrum.hamiltonian.mode_names)
    return (
        spectrum.energy(pair.both)
        - spectrum.energy(pair.first)
        - spectrum.energy(pair.second)
        + spectrum.energy(pair.ground)
    )


def delocalization_exact(spectrum: LabeledSpectrum, pair: Optional[PairLabels] = None) -> float:
    """epsilon = max(|<10~|01>|^2, |<01~|10>|^2)."""
    pair = pair or PairLabels.default(spectrum.spectrum.hamiltonian.mode_names)
    return max(
        spectrum.overlap(pair.first, pair.second),
        spectrum.overlap(pair.second, pair.first),
    )


# ===== CLOSED FORMS =====


def _check_pole(name: str, denominator: float) -> float:
    if abs(denominator) < POLE_TOLERANCE:
        raise PoleError(name, denominator)
    return denominator


def _dimer_couplings(params: DeviceParams) -> Tuple[float, float, float]:
    return params.g("q1", "q2"), params.g("q1", "c"), params.g("q2", "c")


def _geff(g12: float, g1c: float, g2c: float, dets: DetuningSet, rwa: bool) -> float:
    bracket = 1.0 / dets.d1c + 1.0 / dets.d2c
    if not rwa:
        bracket -= 1.0 / dets.s1c + 1.0 / dets.s2c
    return g12 + 0.5 * g1c * g2c * bracket


def g_eff_sw(params: DeviceParams) -> EffectiveCoupling:
    """
    Effective qubit-qubit coupling after eliminating the coupler.

    Raises:
        PoleError: coupler resonant with a qubit
    """
    g12, g1c, g2c = _dimer_couplings(params)
    dets = DetuningSet.from_params(params)
    _check_pole("Delta_1c", dets.d1c)
    _check_pole("Delta_2c", dets.d2c)

    ratio = max(abs(g1c / dets.d1c), abs(g2c / dets.d2c))
    dispersive = ratio < DISPERSIVE_RATIO
    if not dispersive:
        logger.warning(f"Outside the dispersive regime: max |g_ic/Delta_ic| = {ratio:.3f}")

    w1, w2 = params.frequency("q1"), params.frequency("q2")
    dressed = (
        w1 + g1c**2 * (1.0 / dets.d1c - 1.0 / dets.s1c),
        w2 + g2c**2 * (1.0 / dets.d2c - 1.0 / dets.s2c),
    )
    return EffectiveCoupling(
        value=_geff(g12, g1c, g2c, dets, rwa=False),
        rwa_value=_geff(g12, g1c, g2c, dets, rwa=True),
        omega_dressed=dressed,
        dispersive=dispersive,
    )


def _epsilon_at_zero(g12: float, product: float, root: float, sign: float) -> float:
    return (g12 / (product / g12 + sign * root)) ** 2


def _full_geff_zero(
    g12: float, g1c: float, g2c: float, w1: float, w2: float, branch: str, guess: float
) -> Optional[float]:
    """Sign change of the Sigma-corrected coupling nearest to guess on the branch side."""
    low, high = min(w1, w2), max(w1, w2)
    if branch == "-":
        grid = np.linspace(0.05 * low, low - POLE_TOLERANCE, 2001)
    else:
        grid = np.linspace(high + POLE_TOLERANCE, 3.0 * high, 2001)

    def f(wc: float) -> float:
        return _geff(g12, g1c, g2c, DetuningSet.from_frequencies(w1, w2, wc), rwa=False)

    values = np.array([f(wc) for wc in grid])
    crossings = np.nonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0)[0]
    if len(crossings) == 0:
        return None
    k = crossings[np.argmin(np.abs(grid[crossings] - guess))]
    return float(brentq(f, grid[k], grid[k + 1], xtol=1e-12))


def geff_zeros(params: DeviceParams) -> GeffZeros:
    """
    Closed-form zeros of the RWA effective coupling in the coupler frequency.

    Raises:
        DegenerateCouplingError: g_12 = 0
    """
    g12, g1c, g2c = _dimer_couplings(params)
    if abs(g12) < DEGENERATE_COUPLING:
        raise DegenerateCouplingError(
            "g_12 = 0: the coupler-mediated term has nothing to cancel and g_eff has no finite zero"
        )
    dets = DetuningSet.from_params(params)
    product = g1c * g2c
    root = np.sqrt(dets.d12**2 + product**2 / g12**2)

    plus = 0.5 * (dets.s12 + product / g12 + root)
    minus = 0.5 * (dets.s12 + product / g12 - root)
    branch = "+" if np.sign(g12 * product) > 0 else "-"
    chosen = plus if branch == "+" else minus

    full = _full_geff_zero(
        g12, g1c, g2c, params.frequency("q1"), params.frequency("q2"), branch, chosen
    )
    return GeffZeros(
        plus=float(plus),
        minus=float(minus),
        chosen=float(chosen),
        branch=branch,
        epsilon_plus=float(_epsilon_at_zero(g12, product, root, +1.0)),
        epsilon_minus=float(_epsilon_at_zero(g12, product, root, -1.0)),
        full=full,
    )


def epsilon_perturbative(params: DeviceParams) -> float:
    """
    Leading-order delocalization
        max[(g12 + g1c g2c/D1c)^2, (g12 + g1c g2c/D2c)^2] / D12^2
    """
    g12, g1c, g2c = _dimer_couplings(params)
    dets = DetuningSet.from_params(params)
    _check_pole("Delta_12", dets.d12)
    _check_pole("Delta_1c", dets.d1c)
    _check_pole("Delta_2c", dets.d2c)

    f1 = (g12 + g1c * g2c / dets.d1c) ** 2
    f2 = (g12 + g1c * g2c / dets.d2c) ** 2
    return float(max(f1, f2) / dets.d12**2)


def zz_perturbative(params: DeviceParams) -> ZZComponents:
    """
    ZZ coupling to second order in g_12 and fourth order in g_1c, g_2c.

    Rotating-wave form: it tracks the spectrum of build_hamiltonian(..., rwa=True).
    The counter-rotating couplings of the full Hamiltonian shift zeta by a
    relative amount of order Delta/Sigma on top of this.

    Raises:
        PoleError: a denominator within POLE_TOLERANCE of zero
    """
    g12, g1c, g2c = _dimer_couplings(params)
    U1, U2, Uc = (params.anharmonicity_of(name) for name in ("q1", "q2", "c"))
    dets = DetuningSet.from_params(params)

    d12 = _check_pole("Delta_12", dets.d12)
    d21 = -d12
    d1c = _check_pole("Delta_1c", dets.d1c)
    d2c = _check_pole("Delta_2c", dets.d2c)
    a12 = _check_pole("Delta_12 - U_2", d12 - U2)
    a21 = _check_pole("Delta_21 - U_1", d21 - U1)
    two_photon = _check_pole("Delta_1c + Delta_2c - U_c", d1c + d2c - Uc)

    zeta2 = g12**2 * (2.0 / a12 + 2.0 / a21)

    zeta3 = g12 * g1c * g2c * (
        4.0 / (a21 * d2c)
        + 4.0 / (a12 * d1c)
        + 2.0 / (d1c * d2c)
        - 2.0 / (d21 * d2c)
        - 2.0 / (d12 * d1c)
    )

    zeta4 = g1c**2 * g2c**2 * (
        (1.0 / d1c + 1.0 / d2c) ** 2 * 2.0 / two_photon
        - (1.0 / d1c) ** 2 * (1.0 / d12 + 1.0 / d2c - 2.0 / a12)
        - (1.0 / d2c) ** 2 * (1.0 / d21 + 1.0 / d1c - 2.0 / a21)
    )

    return ZZComponents(zeta2=float(zeta2), zeta3=float(zeta3), zeta4=float(zeta4))


def uc_sweet_spot(U: float, d1c: float, d2c: float, delta: float = 0.0) -> float:
    """
    Coupler anharmonicity that cancels the perturbative ZZ coupling when the
    effective coupling is zero. Qubit anharmonicities are U(1 + delta) and
    U(1 - delta); delta = 0 is the symmetric case.

    Raises:
        DivergentSweetSpotError: the bracket vanishes
        PoleError: degenerate qubits or coupler exactly between them
    """
    d12 = _check_pole("Delta_12", d1c - d2c)
    _check_pole("Delta_1c + Delta_2c", d1c + d2c)

    bracket = 1.0 - U**2 / d12**2 - U / (2.0 * (d1c + d2c))
    if delta != 0.0:
        bracket += 2.0 * delta * U / d12 + 2.0 * delta**2 * U**2 / d12**2

    if abs(bracket) < 1e-12:
        raise DivergentSweetSpotError(
            f"Sweet-spot bracket vanishes (U={U:.4g}, D1c={d1c:.4g}, D2c={d2c:.4g}, delta={delta})"
        )
    return float(-0.5 * U / bracket)


# ===== REPORTS =====


def crosstalk_report(
    params: DeviceParams,
    trunc: TruncationPolicy,
    rwa: bool = False,
    solver: str = "auto",
    assembler: Optional[HamiltonianAssembler] = None,
) -> CrosstalkReport:
    """
    Exact zeta and epsilon plus the closed forms that apply at this point.

    Labeling errors propagate; pole errors in the closed forms become flags.
    """
    labeled = dressed_spectrum(params, trunc, rwa=rwa, solver=solver, assembler=assembler)
    report = CrosstalkReport(
        zeta_exact=zz_exact(labeled),
        epsilon_exact=delocalization_exact(labeled),
        omega_c=params.frequency("c") if "c" in params.mode_names else float("nan"),
        phi_ext=params.coupler_flux[0] if params.coupler_flux else float("nan"),
    )
    if labeled.min_weight < 0.9:
        report.flags.append(f"weak labeling (min overlap {labeled.min_weight:.3f})")

    try:
        report.zeta_perturbative = zz_perturbative(params)
        report.epsilon_perturbative = epsilon_perturbative(params)
        coupling = g_eff_sw(params)
        report.g_eff = coupling.value
        if not coupling.dispersive:
            report.flags.append("non-dispersive")
    except PoleError as e:
        report.flags.append(f"pole: {e.resonance}")

    return report


def flagged_report(params: DeviceParams, error: LabelingError) -> CrosstalkReport:
    """Placeholder row for a sweep point whose states could not be labeled."""
    return CrosstalkReport(
        zeta_exact=float("nan"),
        epsilon_exact=float("nan"),
        omega_c=params.frequency("c"),
        phi_ext=params.coupler_flux[0] if params.coupler_flux else float("nan"),
        flags=[f"labeling: {error}"],
    )


def crosstalk_sweep(
    model,
    phi_grid: Sequence[float],
    trunc: TruncationPolicy,
    rwa: bool = False,
    threads: int = 1,
) -> List[CrosstalkReport]:
    """
    Crosstalk report at every flux of a sweep. Points that cannot be labeled
    are kept as NaN rows with a flag.

    Args:
        model: CircuitModel of the dimer
        phi_grid: Coupler fluxes in rad
        trunc: Truncation policy
        rwa: Use the rotating-wave Hamiltonian
        threads: Worker threads
    """
    from decoupler.parallel import ordered_map

    def point(phi: float) -> CrosstalkReport:
        params = model.params_at(phi)
        try:
            return crosstalk_report(params, trunc, rwa=rwa)
        except LabelingError as e:
            logger.warning(f"Labeling failed at phi_ext={phi:.6f}: {e}")
            return flagged_report(params, e)

    return ordered_map(point, phi_grid, threads=threads, desc="crosstalk sweep")


@dataclass
class ConvergenceReport:
    """zeta and epsilon versus levels per mode."""

    levels: List[int]
    zeta: List[float]
    epsilon: List[float]

    @property
    def zeta_spread(self) -> float:
        return float(np.max(self.zeta) - np.min(self.zeta))

    @property
    def epsilon_spread(self) -> float:
        return float(np.max(self.epsilon) - np.min(self.epsilon))

    def rows(self) -> List[Dict[str, float]]:
        return [
            {"levels": n, "zeta_kHz": z / TWO_PI * 1e6, "epsilon": e}
            for n, z, e in zip(self.levels, self.zeta, self.epsilon)
        ]


def convergence_sweep(
    params: DeviceParams,
    levels: Sequence[int] = (5, 6, 7),
    cutoff: Optional[int] = None,
    rwa: bool = False,
) -> ConvergenceReport:
    """Exact zeta and epsilon at increasing truncation."""
    report = ConvergenceReport(levels=[], zeta=[], epsilon=[])
    for n in levels:
        labeled = dressed_spectrum(params, TruncationPolicy(levels=n, cutoff=cutoff), rwa=rwa)
        report.levels.append(int(n))
        report.zeta.append(zz_exact(labeled))
        report.epsilon.append(delocalization_exact(labeled))
        logger.debug(f"N={n}: zeta={report.zeta[-1] / TWO_PI * 1e6:.4f} kHz eps={report.epsilon[-1]:.3e}")
    return report
