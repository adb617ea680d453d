"""
Qubit chains - N transmons with a C-shunt flux coupler between neighbors

Node order is (Q0, 0a, 0b, Q1, 1a, 1b, Q2, ...). Every coupler's node pair
is rotated onto (+, c) like in the dimer and the + modes are dropped, which
leaves the modes (q0, c01, q1, c12, q2, ...). All pairwise couplings come
from the inverted global capacitance matrix, so couplings beyond nearest
neighbors are kept.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from decoupler.circuit.coupler import CouplerSpec, coupler_mode
from decoupler.circuit.model import (
    SQRT_HALF,
    ChargingEnergyMatrix,
    CircuitModel,
    CircuitSpec,
    DeviceParams,
    calibrate_qubit_EJ,
    invert_capacitance,
)
from decoupler.constants import EC_EJ_WARNING_RATIO, TWO_PI
from decoupler.crosstalk import PairLabels, delocalization_exact, dressed_spectrum, zz_exact
from decoupler.errors import InvalidSpecError, LabelingError, SearchError
from decoupler.fock import FockHamiltonian, TruncationPolicy, build_hamiltonian
from decoupler.idle import DEFAULT_WINDOW, find_idle_flux
from decoupler.logging_config import LogContext
from decoupler.parallel import ordered_map

logger = logging.getLogger(__name__)

# Relative charging-energy mismatch accepted after shunt adjustment
SHUNT_TOLERANCE = 1e-3

# Mismatch below which a shunt is left untouched
SHUNT_SKIP = 1e-12

SHUNT_SWEEPS = 2
MAX_SHUNT_SWEEPS = 6


def qubit_name(k: int) -> str:
    return f"q{k}"


def coupler_name(k: int) -> str:
    return f"c{k}{k + 1}"


@dataclass(frozen=True)
class LinkSpec:
    """One coupler between qubits k and k+1. Capacitances in farads, energies in rad/ns."""

    CC: float
    Cg: float
    C_left: float
    C_right: float
    C_direct: float
    EJc: float
    alpha: float
    phi_ext: float = np.pi
    phi_cor: float = 0.0

    @classmethod
    def from_circuit(cls, spec: CircuitSpec, phi_ext: Optional[float] = None) -> "LinkSpec":
        return cls(
            CC=spec.CC,
            Cg=spec.Cg,
            C_left=spec.C1c,
            C_right=spec.C2c,
            C_direct=spec.C12,
            EJc=spec.EJc,
            alpha=spec.alpha,
            phi_ext=spec.phi_ext_c if phi_ext is None else float(phi_ext),
            phi_cor=spec.phi_cor,
        )


@dataclass(frozen=True)
class ChainSpec:
    """
    Linear chain of fixed-frequency transmons.

    dimer_shunts are the qubit shunt capacitances of the isolated dimer each
    link is modeled on; they fix the reference charging energies kept by
    the shunt adjustment.
    """

    qubit_frequencies: Tuple[float, ...]
    links: Tuple[LinkSpec, ...]
    dimer_shunts: Tuple[float, float]
    adjust_shunts: bool = True
    coupler_charging_scale: float = 1.0
    coupler_model: str = "exact"

    @property
    def n_qubits(self) -> int:
        return len(self.qubit_frequencies)

    @property
    def mode_names(self) -> Tuple[str, ...]:
        names = []
        for k in range(self.n_qubits):
            names.append(qubit_name(k))
            if k < self.n_qubits - 1:
                names.append(coupler_name(k))
        return tuple(names)

    @classmethod
    def from_dimer(
        cls,
        spec: CircuitSpec,
        qubit_frequencies: Sequence[float],
        idle_fluxes: Optional[Sequence[float]] = None,
        adjust_shunts: bool = True,
    ) -> "ChainSpec":
        """Every link copies the dimer's coupler and capacitances."""
        n_links = len(qubit_frequencies) - 1
        fluxes = list(idle_fluxes) if idle_fluxes is not None else [spec.phi_ext_c] * n_links
        if len(fluxes) != n_links:
            raise InvalidSpecError(f"Chain of {len(qubit_frequencies)} qubits needs {n_links} coupler fluxes")
        return cls(
            qubit_frequencies=tuple(float(w) for w in qubit_frequencies),
            links=tuple(LinkSpec.from_circuit(spec, phi) for phi in fluxes),
            dimer_shunts=(spec.C1, spec.C2),
            adjust_shunts=adjust_shunts,
            coupler_charging_scale=spec.coupler_charging_scale,
            coupler_model=spec.coupler_model,
        )

    def with_link_fluxes(self, fluxes: Sequence[float]) -> "ChainSpec":
        return replace(self, links=tuple(replace(link, phi_ext=float(phi)) for link, phi in zip(self.links, fluxes)))

    def with_link(self, index: int, link: LinkSpec) -> "ChainSpec":
        links = list(self.links)
        links[index] = link
        return replace(self, links=tuple(links))

    def dimer_spec(self, index: int) -> CircuitSpec:
        """Isolated dimer of link index with its two qubits."""
        link = self.links[index]
        return CircuitSpec(
            C1=self.dimer_shunts[0],
            C2=self.dimer_shunts[1],
            CC=link.CC,
            Cg=link.Cg,
            C12=link.C_direct,
            C1c=link.C_left,
            C2c=link.C_right,
            EJc=link.EJc,
            alpha=link.alpha,
            phi_ext_c=link.phi_ext,
            qubit_targets=(self.qubit_frequencies[index], self.qubit_frequencies[index + 1]),
            phi_cor=link.phi_cor,
            coupler_charging_scale=self.coupler_charging_scale,
            coupler_model=self.coupler_model,
        )

    def validate(self) -> None:
        if self.n_qubits < 2:
            raise InvalidSpecError(f"A chain needs at least 2 qubits, got {self.n_qubits}")
        if len(self.links) != self.n_qubits - 1:
            raise InvalidSpecError(
                f"Chain of {self.n_qubits} qubits needs {self.n_qubits - 1} links, got {len(self.links)}"
            )
        if min(self.dimer_shunts) <= 0 or any(w <= 0 for w in self.qubit_frequencies):
            raise InvalidSpecError("Shunt capacitances and qubit frequencies must be positive")
        for k, link in enumerate(self.links):
            if link.CC <= 0 or link.Cg <= 0:
                raise InvalidSpecError(f"Link {k}: coupler capacitances must be positive")
            if min(link.C_left, link.C_right, link.C_direct) <= 0:
                raise InvalidSpecError(f"Link {k}: coupling capacitances must be positive")


# ===== CAPACITANCES =====


def node_capacitance_matrix(spec: ChainSpec, shunts: Sequence[float]) -> np.ndarray:
    """(3N-2)x(3N-2) node capacitance matrix in farads."""
    n = spec.n_qubits
    size = 3 * n - 2
    C = np.zeros((size, size))

    def connect(i: int, j: Optional[int], value: float) -> None:
        C[i, i] += value
        if j is not None:
            C[j, j] += value
            C[i, j] -= value
            C[j, i] -= value

    for k in range(n):
        connect(3 * k, None, shunts[k])
    for k, link in enumerate(spec.links):
        left, a, b, right = 3 * k, 3 * k + 1, 3 * k + 2, 3 * k + 3
        connect(left, a, link.C_left)
        connect(a, b, link.CC)
        connect(b, right, link.C_right)
        connect(left, right, link.C_direct)
        connect(a, None, link.Cg)
        connect(b, None, link.Cg)
    return C


def coupler_basis_change(n_qubits: int) -> np.ndarray:
    """Rotates every coupler node pair (a, b) onto (+, c)."""
    size = 3 * n_qubits - 2
    S = np.eye(size)
    for k in range(n_qubits - 1):
        a, b = 3 * k + 1, 3 * k + 2
        S[a, a] = S[a, b] = S[b, a] = SQRT_HALF
        S[b, b] = -SQRT_HALF
    return S


def mode_labels(n_qubits: int) -> Tuple[str, ...]:
    labels = []
    for k in range(n_qubits):
        labels.append(qubit_name(k))
        if k < n_qubits - 1:
            labels += [f"+{k}{k + 1}", coupler_name(k)]
    return tuple(labels)


def chain_charging(spec: ChainSpec, shunts: Sequence[float]) -> ChargingEnergyMatrix:
    """Charging energies over the rotated modes, + modes included but marked dropped."""
    S = coupler_basis_change(spec.n_qubits)
    energies, condition = invert_capacitance(S @ node_capacitance_matrix(spec, shunts) @ S.T)
    labels = mode_labels(spec.n_qubits)
    return ChargingEnergyMatrix(
        values=energies,
        labels=labels,
        condition_number=condition,
        dropped=tuple(label for label in labels if label.startswith("+")),
    )


def reference_charging(spec: ChainSpec) -> Tuple[float, ...]:
    """
    Qubit charging energies of the isolated dimers.

    Qubit k takes its value from link k as the left qubit, the last qubit
    from the last link as the right one.
    """
    references = []
    for k in range(spec.n_qubits):
        if k < spec.n_qubits - 1:
            references.append(CircuitModel(spec.dimer_spec(k)).charging.entry("1", "1"))
        else:
            references.append(CircuitModel(spec.dimer_spec(k - 1)).charging.entry("2", "2"))
    return tuple(references)


def initial_shunts(spec: ChainSpec) -> List[float]:
    first, last = spec.dimer_shunts
    return [first] * (spec.n_qubits - 1) + [last]


def adjust_shunts(spec: ChainSpec) -> Tuple[float, ...]:
    """
    Shunt capacitances that restore every qubit's dimer charging energy.

    One scalar root find per qubit, swept until all mismatches are below
    SHUNT_TOLERANCE (at least SHUNT_SWEEPS sweeps for the cross terms).

    Raises:
        SearchError: no bracket or no convergence
    """
    references = reference_charging(spec)
    shunts = initial_shunts(spec)

    def charging_of(k: int, value: float) -> float:
        trial = list(shunts)
        trial[k] = value
        return chain_charging(spec, trial).entry(qubit_name(k), qubit_name(k))

    for sweep in range(MAX_SHUNT_SWEEPS):
        for k, target in enumerate(references):
            if abs(charging_of(k, shunts[k]) - target) <= SHUNT_SKIP * target:
                continue
            low, high = 0.05 * shunts[k], 5.0 * shunts[k]
            f_low, f_high = charging_of(k, low) - target, charging_of(k, high) - target
            if np.sign(f_low) == np.sign(f_high):
                raise SearchError(f"No shunt capacitance restores the charging energy of {qubit_name(k)}")
            shunts[k] = float(
                brentq(lambda C: charging_of(k, C) - target, low, high, xtol=1e-24, rtol=1e-14)
            )

        mismatch = max(
            abs(charging_of(k, shunts[k]) - target) / target for k, target in enumerate(references)
        )
        if sweep + 1 >= SHUNT_SWEEPS and mismatch < SHUNT_TOLERANCE:
            logger.debug(f"Shunt adjustment converged after {sweep + 1} sweeps (mismatch {mismatch:.1e})")
            return tuple(shunts)
    raise SearchError(f"Shunt adjustment did not converge (mismatch {mismatch:.2e})")


# ===== MODEL =====


class ChainModel:
    """
    Flux-independent part of a chain, cached.

    params_at() adds every coupler at its flux; by default the link's own
    idle flux.
    """

    def __init__(self, spec: ChainSpec):
        spec.validate()
        self.spec = spec
        self.shunts = adjust_shunts(spec) if spec.adjust_shunts else tuple(initial_shunts(spec))
        self.charging = chain_charging(spec, self.shunts)
        self.qubit_ECs = tuple(
            self.charging.entry(qubit_name(k), qubit_name(k)) for k in range(spec.n_qubits)
        )
        self.qubit_EJs = tuple(
            calibrate_qubit_EJ(EC, omega) for EC, omega in zip(self.qubit_ECs, spec.qubit_frequencies)
        )

    @property
    def mode_names(self) -> Tuple[str, ...]:
        return self.spec.mode_names

    def coupler_spec(self, index: int, phi_ext: Optional[float] = None) -> CouplerSpec:
        link = self.spec.links[index]
        name = coupler_name(index)
        EC = self.charging.entry(name, name) * self.spec.coupler_charging_scale
        return CouplerSpec(
            EJ=link.EJc,
            alpha=link.alpha,
            EC=EC,
            phi_ext=link.phi_ext if phi_ext is None else float(phi_ext),
            phi_cor=link.phi_cor,
        )

    def params_at(self, fluxes: Optional[Dict[int, float]] = None) -> DeviceParams:
        """
        DeviceParams over (q0, c01, q1, ...).

        Args:
            fluxes: Coupler fluxes by link index; missing links stay at their idle flux
        """
        fluxes = fluxes or {}
        names = self.mode_names
        n = len(names)
        omega, anharmonicity, cubic = np.zeros(n), np.zeros(n), np.zeros(n)
        n_zpf, phi_zpf = np.zeros(n), np.zeros(n)
        warnings = []

        for k, (EC, EJ) in enumerate(zip(self.qubit_ECs, self.qubit_EJs)):
            i = names.index(qubit_name(k))
            if EC / EJ > EC_EJ_WARNING_RATIO:
                warnings.append(f"E_C/E_J = {EC / EJ:.3f} for {qubit_name(k)} exceeds {EC_EJ_WARNING_RATIO}")
            anharmonicity[i] = -EC
            omega[i] = np.sqrt(8.0 * EC * EJ) - EC
            n_zpf[i] = (EJ / (32.0 * EC)) ** 0.25
            phi_zpf[i] = (2.0 * EC / EJ) ** 0.25

        for k in range(len(self.spec.links)):
            i = names.index(coupler_name(k))
            mode = coupler_mode(self.coupler_spec(k, fluxes.get(k)), self.spec.coupler_model)
            omega[i], anharmonicity[i], cubic[i] = mode.omega, mode.anharmonicity, mode.cubic
            n_zpf[i], phi_zpf[i] = mode.n_zpf, mode.phi_zpf

        coupling = np.zeros((n, n))
        for a in range(n):
            for b in range(a + 1, n):
                value = 8.0 * self.charging.entry(names[a], names[b]) * n_zpf[a] * n_zpf[b]
                coupling[a, b] = coupling[b, a] = value

        link_fluxes = tuple(
            float(fluxes.get(k, link.phi_ext)) for k, link in enumerate(self.spec.links)
        )
        return DeviceParams(
            mode_names=names,
            omega=omega,
            anharmonicity=anharmonicity,
            cubic=cubic,
            n_zpf=n_zpf,
            phi_zpf=phi_zpf,
            coupling=coupling,
            coupler_flux=link_fluxes,
            warnings=tuple(warnings),
        )

    def pair_labels(self, index: int) -> PairLabels:
        return PairLabels.for_pair(self.mode_names, qubit_name(index), qubit_name(index + 1))


def build_chain(spec: ChainSpec, trunc: TruncationPolicy) -> Tuple[DeviceParams, FockHamiltonian]:
    """
    Multimode parameters and Hamiltonian of a chain at its idle fluxes.

    Raises:
        ResourceError: dimension above the truncation budget
    """
    model = ChainModel(spec)
    if spec.n_qubits >= 3 and trunc.cutoff is None:
        logger.warning(f"No excitation cutoff for a {spec.n_qubits}-qubit chain")
    params = model.params_at()
    return params, build_hamiltonian(params, trunc)


# ===== PAIRWISE SCANS =====


@dataclass
class PairwiseReport:
    """ZZ and delocalization of one neighbor pair, in the chain and as an isolated dimer."""

    pair: int
    phi_ext: np.ndarray
    omega_c: np.ndarray
    zeta_chain: np.ndarray
    epsilon_chain: np.ndarray
    zeta_dimer: np.ndarray
    epsilon_dimer: np.ndarray
    idle_flux: Optional[float] = None
    idle_omega: Optional[float] = None
    idle_zeta: Optional[float] = None
    flags: List[str] = field(default_factory=list)

    def rows(self) -> List[Dict[str, float]]:
        return [
            {
                "omega_c_GHz": self.omega_c[k] / TWO_PI,
                "zeta_chain_kHz": self.zeta_chain[k] / TWO_PI * 1e6,
                "zeta_dimer_kHz": self.zeta_dimer[k] / TWO_PI * 1e6,
                "eps_chain": self.epsilon_chain[k],
                "eps_dimer": self.epsilon_dimer[k],
            }
            for k in range(len(self.phi_ext))
        ]

    @staticmethod
    def _zero_crossing(x: np.ndarray, y: np.ndarray, near: float) -> float:
        finite = np.isfinite(y)
        x, y = x[finite], y[finite]
        signs = np.nonzero(np.sign(y[:-1]) * np.sign(y[1:]) < 0)[0]
        if not len(signs):
            return float("nan")
        roots = x[signs] - y[signs] * (x[signs + 1] - x[signs]) / (y[signs + 1] - y[signs])
        return float(roots[np.argmin(np.abs(roots - near))])

    @staticmethod
    def _argmin(x: np.ndarray, y: np.ndarray) -> float:
        if not np.any(np.isfinite(y)):
            return float("nan")
        return float(x[np.nanargmin(y)])

    def idle_points(self) -> Dict[str, float]:
        """Coupler frequencies (rad/ns) of the epsilon minimum and the zeta zero, chain and dimer."""
        eps_chain = self._argmin(self.omega_c, self.epsilon_chain)
        eps_dimer = self._argmin(self.omega_c, self.epsilon_dimer)
        return {
            "epsilon_chain": eps_chain,
            "epsilon_dimer": eps_dimer,
            "zeta_chain": self._zero_crossing(self.omega_c, self.zeta_chain, eps_chain),
            "zeta_dimer": self._zero_crossing(self.omega_c, self.zeta_dimer, eps_dimer),
        }


def _pair_metrics(params: DeviceParams, trunc: TruncationPolicy, pair: PairLabels, solver: str):
    labeled = dressed_spectrum(params, trunc, pair=pair, solver=solver)
    return zz_exact(labeled, pair), delocalization_exact(labeled, pair)


def pairwise_idle_scan(
    model: ChainModel,
    pair: int,
    phi_grid: Sequence[float],
    trunc: TruncationPolicy,
    dimer_trunc: Optional[TruncationPolicy] = None,
    solver: str = "sparse",
    refine: bool = True,
    threads: int = 1,
) -> PairwiseReport:
    """
    Sweep one coupler's flux with every other coupler at its idle flux.

    Args:
        model: Prepared chain
        pair: Link index; the pair is (q<pair>, q<pair+1>)
        phi_grid: Fluxes of the swept coupler, rad
        trunc: Chain truncation (levels plus excitation cutoff)
        dimer_trunc: Truncation of the isolated-dimer curves (default: trunc)
        solver: Eigensolver for the chain Hamiltonian
        refine: Root-find the chain's zeta zero between the bracketing grid points
        threads: Worker threads over flux points

    Returns:
        PairwiseReport; unlabelable points are NaN and flagged
    """
    if not 0 <= pair < len(model.spec.links):
        raise InvalidSpecError(f"Pair index {pair} outside the chain's {len(model.spec.links)} links")
    phi_grid = np.asarray(phi_grid, dtype=float)
    labels = model.pair_labels(pair)
    coupler = coupler_name(pair)
    dimer = CircuitModel(model.spec.dimer_spec(pair))
    dimer_trunc = dimer_trunc or trunc
    dimer_labels = PairLabels.default(dimer.params_at().mode_names)

    def point(phi: float):
        params = model.params_at({pair: phi})
        flags = []
        try:
            chain = _pair_metrics(params, trunc, labels, solver)
        except LabelingError as e:
            chain = (np.nan, np.nan)
            flags.append(f"chain labeling failed at phi={phi:.6f}: {e}")
        try:
            isolated = _pair_metrics(dimer.params_at(phi), dimer_trunc, dimer_labels, "auto")
        except LabelingError as e:
            isolated = (np.nan, np.nan)
            flags.append(f"dimer labeling failed at phi={phi:.6f}: {e}")
        return params.frequency(coupler), chain, isolated, flags

    with LogContext(pair=pair):
        results = ordered_map(point, phi_grid, threads=threads, desc=f"pair {pair}")
        report = PairwiseReport(
            pair=pair,
            phi_ext=phi_grid,
            omega_c=np.array([r[0] for r in results]),
            zeta_chain=np.array([r[1][0] for r in results]),
            epsilon_chain=np.array([r[1][1] for r in results]),
            zeta_dimer=np.array([r[2][0] for r in results]),
            epsilon_dimer=np.array([r[2][1] for r in results]),
            flags=[flag for r in results for flag in r[3]],
        )
        for flag in report.flags:
            logger.warning(flag)

        if refine:
            _refine_chain_idle(model, report, trunc, labels, solver)
        return report


def _refine_chain_idle(
    model: ChainModel, report: PairwiseReport, trunc: TruncationPolicy, labels: PairLabels, solver: str
) -> None:
    """Zeta zero of the chain nearest its epsilon minimum, by brentq on the flux."""
    zeta = report.zeta_chain
    finite = np.nonzero(np.isfinite(zeta))[0]
    crossings = [
        (finite[i], finite[i + 1])
        for i in range(len(finite) - 1)
        if np.sign(zeta[finite[i]]) * np.sign(zeta[finite[i + 1]]) < 0
    ]
    if not crossings:
        report.flags.append("no zeta zero on the chain grid")
        return
    if np.any(np.isfinite(report.epsilon_chain)):
        best = int(np.nanargmin(report.epsilon_chain))
    else:
        best = len(zeta) // 2
    a, b = min(crossings, key=lambda ab: abs(ab[0] - best))

    def zeta_at(phi: float) -> float:
        return _pair_metrics(model.params_at({report.pair: phi}), trunc, labels, solver)[0]

    try:
        phi = float(brentq(zeta_at, report.phi_ext[a], report.phi_ext[b], xtol=1e-10))
    except LabelingError as e:
        report.flags.append(f"chain idle refinement failed: {e}")
        return
    params = model.params_at({report.pair: phi})
    report.idle_flux = phi
    report.idle_omega = params.frequency(coupler_name(report.pair))
    report.idle_zeta = zeta_at(phi)
    logger.info(
        f"Pair {report.pair}: chain idle at omega_c={report.idle_omega / TWO_PI:.5f} GHz "
        f"(zeta {report.idle_zeta / TWO_PI * 1e6:.3g} kHz)"
    )


def with_dimer_idle_fluxes(
    spec: ChainSpec,
    window: Tuple[float, float] = DEFAULT_WINDOW,
    trunc: Optional[TruncationPolicy] = None,
    threads: int = 1,
) -> ChainSpec:
    """Chain with every coupler at the idle flux of its isolated dimer."""
    fluxes = []
    for k in range(len(spec.links)):
        result = find_idle_flux(spec.dimer_spec(k), window=window, trunc=trunc, threads=threads)
        logger.info(f"Link {k}: dimer idle flux {result.phi_ext:.6f} rad")
        fluxes.append(result.phi_ext)
    return spec.with_link_fluxes(fluxes)
