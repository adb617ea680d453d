"""
CZ gate simulation and pulse optimization

Two schemes are supported:

    cz40     the coupler is pulsed up to switch on a ZZ interaction; the
             hold gives the |101> state a conditional phase pi
    cz-fast  qubit 1 is pulsed down so that |101> and |200> are resonant
             while the coupler pulse opens their avoided crossing; one full
             oscillation returns the population with phase pi

Both use erf flattop pulses. Free parameters are optimized with a bounded
Nelder-Mead simplex at a coarse time step; the reported gate is always
re-simulated at the fine step.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import brentq, minimize, minimize_scalar

from decoupler.circuit.model import DIMER_MODES, CircuitModel, DeviceParams
from decoupler.constants import TWO_PI, ghz_to_angular
from decoupler.crosstalk import PairLabels, dressed_spectrum, zz_exact
from decoupler.errors import DecouplerError, InvalidSpecError, LabelingError
from decoupler.fock import (
    HamiltonianAssembler,
    LabeledSpectrum,
    TruncationPolicy,
    diagonalize,
    build_hamiltonian,
    continue_labels,
    format_label,
    label_states,
    parse_label,
    shared_operators,
)
from decoupler.gates.metrics import (
    computational_unitary,
    decoherence_estimate,
    leakage,
    process_infidelity,
)
from decoupler.gates.propagation import ParameterSchedule, check_step_convergence, propagate
from decoupler.gates.pulses import CouplerBranch, FluxSchedule, PulseSpec, flattop, flux_schedule
from decoupler.logging_config import OperationLogger

logger = logging.getLogger(__name__)

SCHEMES = ("cz40", "cz-fast")

# States adjacent to |101> whose populations are tracked in the fast scheme
POPULATION_LABELS = tuple(parse_label(s) for s in ("101", "200", "011", "110", "020"))

# Objective assigned to parameter points where the gate cannot be evaluated
FAILED_OBJECTIVE = 10.0

# Rise times tried by the cz40 seed
TAU_CANDIDATES = 6

# Relative simplex edge in the unit-scaled parameter box
SIMPLEX_STEP = 0.05

# Relative objective gain below which a simplex restart stops the search
RESTART_GAIN = 1e-3


@dataclass(frozen=True)
class GateSettings:
    """Gate scheme, pulse seeds, numerics and optimizer budget. Frequencies in rad/ns, times in ns."""

    scheme: str = "cz40"
    t_gate: float = 40.0
    tau: Optional[float] = None
    omega_int: Optional[float] = None
    omega_q1_int: Optional[float] = None
    dt: float = 1e-3
    optimize_dt: float = 1e-2
    sample_dt: float = 0.25
    tau_coherence_us: float = 50.0
    leakage_weight: float = 1.0
    max_evaluations: int = 300
    objective_target: float = 5e-4
    omega_int_bounds: Tuple[float, float] = (ghz_to_angular(5.2), ghz_to_angular(6.05))
    tau_bounds: Tuple[float, float] = (0.5, 15.0)
    q1_window: float = ghz_to_angular(0.1)
    branch: Tuple[float, float] = (0.0, np.pi)
    check_convergence: bool = True
    convergence_tolerance: float = 1e-6
    populations: bool = False

    @classmethod
    def for_scheme(cls, scheme: str, **overrides) -> "GateSettings":
        if scheme not in SCHEMES:
            raise InvalidSpecError(f"Unknown gate scheme: '{scheme}'. Available: {', '.join(SCHEMES)}")
        defaults = {
            "cz40": {"t_gate": 40.0},
            "cz-fast": {"t_gate": 20.0, "tau_bounds": (0.5, 5.0), "objective_target": 1e-4},
        }
        values = {**defaults[scheme], **{k: v for k, v in overrides.items() if v is not None}}
        return cls(scheme=scheme, **values)

    @property
    def parameter_names(self) -> Tuple[str, ...]:
        if self.scheme == "cz-fast":
            return ("tau", "omega_int", "omega_q1_int")
        return ("tau", "omega_int")

    def validate(self) -> None:
        if self.scheme not in SCHEMES:
            raise InvalidSpecError(f"Unknown gate scheme: '{self.scheme}'")
        if self.t_gate <= 0 or self.dt <= 0 or self.optimize_dt <= 0:
            raise InvalidSpecError("Gate time and time steps must be positive")
        if self.leakage_weight < 0:
            raise InvalidSpecError("Leakage weight must be non-negative")


@dataclass
class PulseTrace:
    """Sampled pulse channels."""

    times: np.ndarray
    omega_c: np.ndarray
    phi_ext: np.ndarray
    omega_q1: Optional[np.ndarray] = None

    def rows(self) -> List[Dict[str, float]]:
        out = []
        for k, t in enumerate(self.times):
            row = {"t_ns": t, "omega_c_GHz": self.omega_c[k] / TWO_PI}
            if self.omega_q1 is not None:
                row["omega_q1_GHz"] = self.omega_q1[k] / TWO_PI
            row["phi_ext_over_Phi0"] = self.phi_ext[k] / (2.0 * np.pi)
            out.append(row)
        return out


@dataclass
class PopulationTrace:
    """|<k~|psi(t)>|^2 for labeled states k, starting from |101~>."""

    times: List[float]
    populations: Dict[str, List[float]]

    def rows(self) -> List[Dict[str, float]]:
        return [
            {"t_ns": t, **{f"P_{name}": values[k] for name, values in self.populations.items()}}
            for k, t in enumerate(self.times)
        ]


@dataclass
class GateReport:
    """Outcome of one simulated gate."""

    scheme: str
    parameters: Dict[str, float]
    raw: np.ndarray
    compensated: np.ndarray
    infidelity: float
    leakage: float
    unitarity_defect: float
    decoherence: float
    t_gate: float
    dt: float
    objective: float
    evaluations: int = 1
    converged: bool = True
    step_change: Optional[float] = None
    trace: List[Tuple[Dict[str, float], float]] = field(default_factory=list)
    pulse: Optional[PulseTrace] = None
    populations: Optional[PopulationTrace] = None

    def parameters_out(self) -> Dict[str, float]:
        """Parameters in output units (ns, GHz)."""
        return {
            (f"{k}_GHz" if k.startswith("omega") else f"{k}_ns"): (v / TWO_PI if k.startswith("omega") else v)
            for k, v in self.parameters.items()
        }

    def summary(self) -> Dict[str, object]:
        return {
            "scheme": self.scheme,
            "t_gate_ns": self.t_gate,
            "dt_ns": self.dt,
            "parameters": self.parameters_out(),
            "infidelity": self.infidelity,
            "leakage": self.leakage,
            "unitarity_defect": self.unitarity_defect,
            "decoherence_estimate": self.decoherence,
            "objective": self.objective,
            "evaluations": self.evaluations,
            "converged": self.converged,
            "step_change": self.step_change,
        }

    def as_text(self) -> str:
        lines = [f"{key}: {value}" for key, value in self.summary().items() if key != "parameters"]
        lines.append("parameters:")
        lines += [f"  {key}: {value:.10g}" for key, value in self.parameters_out().items()]
        for title, matrix in (("unitary", self.raw), ("compensated", self.compensated)):
            lines.append(f"{title}:")
            for row in matrix:
                lines.append("  " + "  ".join(f"{z.real:+.6f}{z.imag:+.6f}j" for z in row))
        return "\n".join(lines) + "\n"


class GateSimulator:
    """
    Simulates gates of one scheme around a fixed idle point.

    The computational basis is the labeled eigenbasis at the idle flux; the
    Hamiltonian at every pulse sample is rebuilt from the circuit model at
    the corresponding flux (and qubit-1 frequency in the fast scheme).
    """

    def __init__(
        self,
        model: CircuitModel,
        idle_flux: float,
        settings: GateSettings,
        trunc: Optional[TruncationPolicy] = None,
    ):
        settings.validate()
        self.model = model
        self.settings = settings
        self.trunc = trunc or TruncationPolicy(levels=6, cutoff=5)
        self.idle_flux = float(idle_flux)
        self.idle_params = model.params_at(self.idle_flux)
        self.omega_idle = self.idle_params.frequency("c")
        self.omega_q1_idle = self.idle_params.frequency("q1")
        self.branch = CouplerBranch(model.coupler_spec, settings.branch, model.spec.coupler_model)

        levels = self.trunc.levels_for(len(DIMER_MODES))
        self.assembler = HamiltonianAssembler(shared_operators(levels, self.trunc.cutoff), rwa=False)
        self.pair = PairLabels.for_pair(DIMER_MODES, "q1", "q2")
        self.labeled = dressed_spectrum(
            self.idle_params, self.trunc, pair=self.pair, assembler=self.assembler
        )
        self.population_labels: Optional[LabeledSpectrum] = None
        try:
            self.population_labels = label_states(
                self.labeled.spectrum,
                self.pair.all() + list(POPULATION_LABELS),
                threshold=self.trunc.overlap_threshold,
            )
        except LabelingError as e:
            logger.warning(f"Population states could not be labeled at idle: {e}")
        logger.info(
            f"Gate simulator ({settings.scheme}): idle omega_c={self.omega_idle / TWO_PI:.4f} GHz, "
            f"{self.assembler.dim} states"
        )

    # ----- parameters -----

    def bounds(self, seed: Dict[str, float]) -> List[Tuple[float, float]]:
        s = self.settings
        out = [s.tau_bounds, s.omega_int_bounds]
        if s.scheme == "cz-fast":
            center = seed["omega_q1_int"]
            out.append((center - s.q1_window, center + s.q1_window))
        return out

    def pulses(self, x: Dict[str, float]) -> Tuple[PulseSpec, Optional[PulseSpec]]:
        s = self.settings
        coupler = PulseSpec(self.omega_idle, x["omega_int"], x["tau"], s.t_gate)
        qubit = None
        if s.scheme == "cz-fast":
            qubit = PulseSpec(self.omega_q1_idle, x["omega_q1_int"], x["tau"], s.t_gate, channel="q1")
        return coupler, qubit

    def sample_times(self) -> np.ndarray:
        count = max(int(round(self.settings.t_gate / self.settings.sample_dt)), 8) + 1
        return np.linspace(0.0, self.settings.t_gate, count)

    def params_along(self, flux: FluxSchedule, omega_q1: Optional[np.ndarray]) -> List[DeviceParams]:
        out = []
        for k, phi in enumerate(flux.phi_ext):
            targets = None if omega_q1 is None else (float(omega_q1[k]), None)
            out.append(self.model.params_at(float(phi), qubit_targets=targets))
        return out

    def schedule(self, x: Dict[str, float]) -> Tuple[ParameterSchedule, PulseTrace]:
        coupler, qubit = self.pulses(x)
        times = self.sample_times()
        flux = flux_schedule(coupler, self.branch, times)
        omega_q1 = flattop(qubit, times) if qubit is not None else None
        coefficients = np.stack([self.assembler.coefficients(p) for p in self.params_along(flux, omega_q1)])
        trace = PulseTrace(times=times, omega_c=flux.omega, phi_ext=flux.phi_ext, omega_q1=omega_q1)
        return ParameterSchedule(times, coefficients, self.assembler), trace

    # ----- simulation -----

    def simulate(self, x: Dict[str, float], dt: Optional[float] = None, populations: bool = False) -> GateReport:
        """
        Simulate one gate.

        Raises:
            UnreachableFrequencyError: pulse leaves the coupler branch
            CompensationError: gross leakage
            IntegrationError: unitarity lost
        """
        s = self.settings
        dt = dt or s.dt
        schedule, trace = self.schedule(x)

        snapshot_every, project = None, None
        if populations and self.population_labels is not None:
            snapshot_every = max(int(round(s.sample_dt / dt)), 1)
            psi0 = self.population_labels.vector(POPULATION_LABELS[0])
            project = lambda U: U @ psi0  # noqa: E731

        result = propagate(schedule, dt, snapshot_every=snapshot_every, project=project)
        U = result.unitary
        projected = computational_unitary(U, self.labeled, self.pair)
        infidelity = process_infidelity(projected.compensated)
        leak = leakage(U, self.labeled, self.pair)

        report = GateReport(
            scheme=s.scheme,
            parameters=dict(x),
            raw=projected.raw,
            compensated=projected.compensated,
            infidelity=infidelity,
            leakage=leak,
            unitarity_defect=result.defect,
            decoherence=decoherence_estimate(s.t_gate, s.tau_coherence_us),
            t_gate=s.t_gate,
            dt=dt,
            objective=infidelity + s.leakage_weight * leak,
            pulse=trace,
        )
        if snapshot_every:
            report.populations = self._populations(result.snapshot_times, result.snapshots)
        return report

    def _populations(self, times: Sequence[float], states: Sequence[np.ndarray]) -> PopulationTrace:
        vectors = {format_label(label): self.population_labels.vector(label) for label in POPULATION_LABELS}
        initial = format_label(POPULATION_LABELS[0])
        populations = {
            name: [1.0 if name == initial else 0.0] + [float(abs(np.vdot(vector, psi)) ** 2) for psi in states]
            for name, vector in vectors.items()
        }
        return PopulationTrace(times=[0.0] + list(times), populations=populations)

    def objective(self, x: Dict[str, float], dt: Optional[float] = None) -> float:
        try:
            return self.simulate(x, dt=dt).objective
        except DecouplerError as e:
            logger.debug(f"Gate evaluation failed at {x}: {e}")
            return FAILED_OBJECTIVE

    # ----- seeds -----

    def zeta_table(self, top: Optional[float] = None, points: int = 121) -> Tuple[np.ndarray, np.ndarray]:
        """
        zeta along the coupler branch from the idle frequency up to `top`.

        Once the bare-state labeling becomes ambiguous near the qubit
        resonance, the labels are carried along by eigenvector overlap with
        the previous point.
        """
        grid = np.linspace(self.omega_idle, top or self.settings.omega_int_bounds[1], points)
        zeta = np.empty(points)
        previous, following = self.labeled, False
        for k, omega in enumerate(grid):
            params = self.model.params_at(self.branch.invert(omega))
            spectrum = diagonalize(
                build_hamiltonian(params, self.trunc, assembler=self.assembler), k=self.trunc.eigenpairs
            )
            labeled = None
            if not following:
                try:
                    labeled = label_states(spectrum, self.pair.all(), threshold=self.trunc.overlap_threshold)
                except LabelingError:
                    following = True
                    logger.debug(f"Following labels by overlap from {omega / TWO_PI:.4f} GHz")
            if labeled is None:
                labeled = continue_labels(spectrum, previous)
            zeta[k] = zz_exact(labeled, self.pair)
            previous = labeled
        return grid, zeta

    def _tau_candidates(self) -> np.ndarray:
        s = self.settings
        if s.tau is not None:
            return np.array([s.tau])
        low, high = s.tau_bounds
        return np.linspace(low, max(low, min(high, s.t_gate / 6.0)), TAU_CANDIDATES)

    def seed_cz40(self) -> Dict[str, float]:
        """
        Rise time and amplitude whose accumulated conditional phase
        integral(zeta dt) reaches pi.

        For every rise-time candidate the smallest amplitude reaching pi is
        solved on the tabulated zeta; the candidate with the lowest gate
        objective at the coarse step is the seed.
        """
        s = self.settings
        taus = self._tau_candidates()
        if s.omega_int is not None:
            candidates = [{"tau": float(tau), "omega_int": s.omega_int} for tau in taus]
        else:
            grid, zeta = self.zeta_table()
            times = self.sample_times()

            def excess(omega_int: float, tau: float) -> float:
                pulse = PulseSpec(self.omega_idle, omega_int, tau, s.t_gate)
                return abs(float(trapezoid(np.interp(flattop(pulse, times), grid, zeta), times))) - np.pi

            amplitudes = np.linspace(max(s.omega_int_bounds[0], grid[0]), grid[-1], 32)
            candidates, closest = [], None
            for tau in taus:
                values = np.array([excess(w, tau) for w in amplitudes])
                crossings = np.nonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0)[0]
                if len(crossings):
                    k = crossings[0]
                    omega_int = brentq(excess, amplitudes[k], amplitudes[k + 1], args=(tau,), xtol=1e-9)
                    candidates.append({"tau": float(tau), "omega_int": float(omega_int)})
                else:
                    k = int(np.argmin(np.abs(values)))
                    if closest is None or abs(values[k]) < closest[0]:
                        closest = (abs(values[k]), {"tau": float(tau), "omega_int": float(amplitudes[k])})
            if not candidates:
                logger.warning("No amplitude reaches a conditional phase of pi; seeding at the closest point")
                candidates = [closest[1]]

        if len(candidates) == 1:
            seed = candidates[0]
        else:
            scores = [self.objective(x, dt=s.optimize_dt) for x in candidates]
            seed = candidates[int(np.argmin(scores))]
            logger.debug(f"cz40 seed objectives: {', '.join(f'{v:.3e}' for v in scores)}")
        logger.info(f"cz40 seed: tau={seed['tau']:.3f} ns, omega_int={seed['omega_int'] / TWO_PI:.4f} GHz")
        return seed

    def _resonance_gap(self, omega_c: float, omega_q1: float) -> float:
        """Splitting of the two eigenstates carrying most of |101> and |200>."""
        params = self.model.params_at(self.branch.invert(omega_c), qubit_targets=(omega_q1, None))
        spectrum = diagonalize(build_hamiltonian(params, self.trunc, assembler=self.assembler))
        weights = spectrum.weights_of(POPULATION_LABELS[0]) + spectrum.weights_of(POPULATION_LABELS[1])
        a, b = np.argsort(weights)[-2:]
        return float(abs(spectrum.values[a] - spectrum.values[b]))

    def _minimum_gap(self, omega_c: float) -> Tuple[float, float]:
        guess = self.idle_params.frequency("q2") - self.idle_params.anharmonicity_of("q1")
        result = minimize_scalar(
            lambda w: self._resonance_gap(omega_c, w),
            bounds=(guess - self.settings.q1_window, guess + self.settings.q1_window),
            method="bounded",
            options={"xatol": 1e-6},
        )
        return float(result.fun), float(result.x)

    def seed_fast(self) -> Dict[str, float]:
        """
        Qubit-1 frequency at the |101>-|200> crossing and a coupler amplitude
        whose splitting completes one oscillation during the flat top.
        """
        s = self.settings
        tau = s.tau if s.tau is not None else 2.0
        hold = s.t_gate - 2.0 * tau
        if s.omega_int is not None and s.omega_q1_int is not None:
            return {"tau": tau, "omega_int": s.omega_int, "omega_q1_int": s.omega_q1_int}

        def excess(omega_c: float) -> float:
            return self._minimum_gap(omega_c)[0] * hold - TWO_PI

        low, high = s.omega_int_bounds
        candidates = np.linspace(low, high, 12)
        values = np.array([excess(w) for w in candidates])
        crossings = np.nonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0)[0]
        if s.omega_int is not None:
            omega_int = s.omega_int
        elif len(crossings):
            k = crossings[0]
            omega_int = float(brentq(excess, candidates[k], candidates[k + 1], xtol=1e-7))
        else:
            omega_int = float(candidates[int(np.argmin(np.abs(values)))])
            logger.warning("No coupler amplitude gives one full oscillation; seeding at the closest point")
        omega_q1 = s.omega_q1_int if s.omega_q1_int is not None else self._minimum_gap(omega_int)[1]
        logger.info(
            f"cz-fast seed: tau={tau:.3f} ns, omega_int={omega_int / TWO_PI:.4f} GHz, "
            f"omega_q1={omega_q1 / TWO_PI:.4f} GHz"
        )
        return {"tau": tau, "omega_int": omega_int, "omega_q1_int": omega_q1}

    def seed(self) -> Dict[str, float]:
        return self.seed_fast() if self.settings.scheme == "cz-fast" else self.seed_cz40()

    # ----- final report -----

    def verified(self, x: Dict[str, float]) -> GateReport:
        """Fine-step report, with the step-halving check when enabled."""
        s = self.settings
        report = self.simulate(x, dt=s.dt, populations=s.populations)
        if s.check_convergence:
            report.step_change = check_step_convergence(
                lambda h: report.infidelity if h == s.dt else self.simulate(x, dt=h).infidelity,
                s.dt,
                tolerance=s.convergence_tolerance,
            )
        return report


class _BudgetExhausted(Exception):
    """The objective was asked for one evaluation more than the budget allows."""


def _initial_simplex(start: np.ndarray) -> np.ndarray:
    simplex = [start]
    for i in range(len(start)):
        vertex = start.copy()
        vertex[i] += SIMPLEX_STEP if vertex[i] + SIMPLEX_STEP <= 1.0 else -SIMPLEX_STEP
        simplex.append(vertex)
    return np.array(simplex)


def optimize_pulse(
    simulator: GateSimulator,
    seed: Optional[Dict[str, float]] = None,
    max_evaluations: Optional[int] = None,
    op_logger: Optional[OperationLogger] = None,
    verify: bool = True,
) -> GateReport:
    """
    Minimize infidelity + leakage_weight * leakage over the scheme's free
    pulse parameters with a bounded Nelder-Mead simplex.

    The search runs in the unit box spanned by the parameter bounds, from a
    deterministic initial simplex around the seed, at the coarse optimizer
    step. A simplex that converges above settings.objective_target is
    rebuilt around the best point and restarted while restarts still gain.
    The budget caps every objective evaluation, restarts included. The best
    point seen is re-simulated at the fine step.

    Args:
        simulator: Prepared gate simulator
        seed: Starting parameters (default: the scheme's physical seed)
        max_evaluations: Objective budget (default from settings)
        op_logger: Records each evaluation
        verify: Re-simulate the best point at the fine step

    Returns:
        GateReport of the best point; converged is False when the budget ran out
    """
    s = simulator.settings
    seed = seed or simulator.seed()
    names = s.parameter_names
    bounds = np.array(simulator.bounds(seed), dtype=float)
    lo, width = bounds[:, 0], bounds[:, 1] - bounds[:, 0]
    budget = max_evaluations or s.max_evaluations

    def unscale(u: np.ndarray) -> Dict[str, float]:
        values = lo + np.clip(u, 0.0, 1.0) * width
        return {name: float(v) for name, v in zip(names, values)}

    start = np.clip((np.array([seed[n] for n in names]) - lo) / width, 0.0, 1.0)
    trace: List[Tuple[Dict[str, float], float]] = []
    best = {"u": start, "x": unscale(start), "f": np.inf}

    def fun(u: np.ndarray) -> float:
        if len(trace) >= budget:
            raise _BudgetExhausted()
        x = unscale(u)
        value = simulator.objective(x, dt=s.optimize_dt)
        trace.append((x, value))
        if value < best["f"]:
            best.update(u=np.clip(u, 0.0, 1.0), x=x, f=value)
        if op_logger:
            op_logger.debug("evaluation", index=len(trace), objective=value, **x)
        return value

    restarts, converged = 0, False
    while True:
        before = best["f"]
        simplex = _initial_simplex(np.array(best["u"], dtype=float))
        try:
            result = minimize(
                fun,
                simplex[0],
                method="Nelder-Mead",
                bounds=[(0.0, 1.0)] * len(names),
                options={
                    "maxfev": budget - len(trace),
                    "initial_simplex": simplex,
                    "xatol": 1e-5,
                    "fatol": 1e-8,
                },
            )
            converged = bool(result.success)
        except _BudgetExhausted:
            converged = False
        if not converged or best["f"] <= s.objective_target or len(trace) >= budget:
            break
        if np.isfinite(before) and before - best["f"] <= RESTART_GAIN * before:
            break
        restarts += 1
        logger.info(f"Simplex restart {restarts} at objective {best['f']:.3e}")

    converged = converged and len(trace) < budget
    logger.info(
        f"Pulse optimization: {len(trace)} evaluations, {restarts} restarts, best objective {best['f']:.3e}"
        f"{'' if converged else ' (budget exhausted)'}"
    )

    if verify:
        report = simulator.verified(best["x"])
    else:
        report = simulator.simulate(best["x"], dt=s.optimize_dt)
    report.evaluations = len(trace)
    report.converged = converged
    report.trace = trace
    if op_logger:
        op_logger.success("optimized", objective=report.objective, infidelity=report.infidelity, restarts=restarts)
    return report


def simulate_gate(
    model: CircuitModel,
    idle_flux: float,
    settings: GateSettings,
    trunc: Optional[TruncationPolicy] = None,
    optimize: bool = False,
    op_logger: Optional[OperationLogger] = None,
) -> GateReport:
    """Seed (and optionally optimize) a gate, then report it at the fine step."""
    simulator = GateSimulator(model, idle_flux, settings, trunc)
    seed = simulator.seed()
    if optimize:
        return optimize_pulse(simulator, seed=seed, op_logger=op_logger)
    report = simulator.verified(seed)
    report.trace = [(seed, report.objective)]
    return report
