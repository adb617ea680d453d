"""
Command-line interface for Decoupler.

Usage:
    python run.py [global options] <subcommand> [options]

Subcommands:
    device-params     Derived mode frequencies, anharmonicities and couplings
    coupler-spectrum  Coupler frequency, anharmonicity and cubic term versus flux
    spectrum          Lowest dressed levels of the dimer
    crosstalk         ZZ shift and delocalization at one flux or over a sweep
    idle-search       Coupler flux that decouples the qubits
    zz-map            Residual ZZ at the idle point over (EJc, alpha)
    robustness        Residual ZZ after flux re-optimization over fabrication errors
    gate              CZ gate simulation and pulse optimization
    chain-scan        Pairwise idle points of a qubit chain

Every run writes its CSV/text outputs and a manifest.yaml into the output
directory. Exit codes: 0 success, 2 configuration, 3 physics regime,
4 numerical convergence.
"""

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from decoupler import __version__
from decoupler.artifacts import ArtifactWriter, RunManifest, eigenvector_dump
from decoupler.chain import (
    ChainModel,
    ChainSpec,
    pairwise_idle_scan,
    with_dimer_idle_fluxes,
)
from decoupler.circuit.coupler import spectrum_vs_flux
from decoupler.circuit.model import CircuitModel
from decoupler.config import Config, linspace_spec
from decoupler.constants import DEFAULT_CONFIG_FILE, TWO_PI, ghz_to_angular, phi0_to_rad, rad_to_phi0
from decoupler.crosstalk import (
    PairLabels,
    convergence_sweep,
    crosstalk_report,
    crosstalk_sweep,
    geff_zeros,
)
from decoupler.errors import ConfigError, DecouplerError, RegimeError
from decoupler.fock import TruncationPolicy, build_hamiltonian, diagonalize, label_states, level_table
from decoupler.gates import GateSettings, simulate_gate
from decoupler.idle import find_idle_flux, robustness_grid, zero_zz_manifold
from decoupler.logging_config import LogContext, OperationLogger, get_logger, setup_logging
from decoupler.startup import run_preflight

logger = get_logger(__name__)

# Robustness acceptance: |zeta|/2pi below 1 kHz with epsilon below 5e-4
SUPPRESSED_ZETA = TWO_PI * 1e-6
SUPPRESSED_EPSILON = 5e-4


# ===== RUN CONTEXT =====


@dataclass
class RunContext:
    """Configuration, output writer and shared settings of one subcommand run."""

    args: argparse.Namespace
    config: Config
    writer: ArtifactWriter
    threads: int
    operations: List[OperationLogger] = field(default_factory=list)

    @cached_property
    def model(self) -> CircuitModel:
        return CircuitModel(self.config.circuit_spec())

    def truncation(self, kind: str = "dimer") -> TruncationPolicy:
        return self.config.truncation_policy(kind, getattr(self.args, "truncation", None))

    def operation(self, name: str) -> OperationLogger:
        op_logger = OperationLogger(name, self.writer.directory)
        self.operations.append(op_logger)
        return op_logger

    def metadata(self, trunc: Optional[TruncationPolicy] = None, **extra) -> Dict[str, object]:
        """Header block for CSV files; no timestamps so bytes stay reproducible."""
        meta: Dict[str, object] = {
            "command": self.args.command,
            "version": __version__,
            "config": Path(self.config.config_path).name,
        }
        if trunc is not None:
            meta["levels"] = trunc.levels
            meta["cutoff"] = "none" if trunc.cutoff is None else trunc.cutoff
        meta.update(extra)
        return meta


def _print_table(rows: Sequence[Dict[str, object]], title: Optional[str] = None) -> None:
    if title:
        print(title)
    print(pd.DataFrame(list(rows)).to_string(index=False))


def _flux_grid(value, name: str) -> np.ndarray:
    """[start, stop, count] in Phi0 to a grid in rad."""
    start, stop, count = linspace_spec(value, name)
    return phi0_to_rad(np.linspace(start, stop, count))


def _flux_arg(value: Optional[float], default_phi0: float) -> float:
    return phi0_to_rad(default_phi0 if value is None else value)


# ===== SUBCOMMANDS =====


def cmd_device_params(ctx: RunContext) -> None:
    """Mode table plus charging energies, calibrated qubit EJ and bias fluxes."""
    model = ctx.model
    params = model.params_at(_flux_arg(ctx.args.flux, ctx.config.coupler_flux_Phi0))
    rows = params.as_table()
    for label in model.charging.labels:
        if label in model.charging.dropped:
            continue
        rows.append({"quantity": f"EC {label}{label}", "EC_GHz": model.charging.entry(label, label) / TWO_PI})
    for slot, EJ in enumerate(model.qubit_EJs):
        rows.append({"quantity": f"EJ q{slot + 1}", "EJ_GHz": EJ / TWO_PI})
    for slot, flux in enumerate(model.qubit_bias_flux()):
        if flux is not None:
            rows.append({"quantity": f"bias q{slot + 1}", "flux_Phi0": rad_to_phi0(flux)})

    columns = ["quantity", "omega_GHz", "U_MHz", "K_MHz", "n_zpf", "phi_zpf", "g_MHz", "EC_GHz", "EJ_GHz", "flux_Phi0"]
    ctx.writer.csv(
        "device_params.csv",
        rows,
        ctx.metadata(
            phi_ext_over_Phi0=rad_to_phi0(params.coupler_flux[0]),
            phi_cor_over_Phi0=ctx.config.coupler_phi_cor_Phi0,
            coupler_model=ctx.config.coupler_model,
        ),
        columns=columns,
    )
    for message in params.warnings:
        logger.warning(message)
    _print_table(rows)


def cmd_coupler_spectrum(ctx: RunContext) -> None:
    grid = _flux_grid(ctx.config.sweep["spectrum_Phi0"], "sweep.spectrum_Phi0")
    sweep = spectrum_vs_flux(ctx.model.coupler_spec, grid, oracle=ctx.args.oracle, threads=ctx.threads)
    rows = sweep.rows()
    ctx.writer.csv(
        "coupler_spectrum.csv",
        rows,
        ctx.metadata(EJc_GHz=ctx.config.coupler_EJ_GHz, alpha=ctx.config.coupler_alpha, invalid_points=len(sweep.notes)),
    )
    if ctx.args.oracle:
        valid = sweep.valid
        if np.any(valid):
            d_omega = np.max(np.abs(sweep.omega[valid] / sweep.omega_exact[valid] - 1.0))
            d_U = np.max(np.abs(sweep.anharmonicity[valid] / sweep.anharmonicity_exact[valid] - 1.0))
            logger.info(f"Oracle: max |d omega_c| {d_omega:.2%}, max |d U_c| {d_U:.2%}")
    print(f"{int(np.sum(sweep.valid))} of {len(grid)} flux points in the single-well regime")


def cmd_spectrum(ctx: RunContext) -> None:
    params = ctx.model.params_at(_flux_arg(ctx.args.flux, ctx.config.coupler_flux_Phi0))
    trunc = ctx.truncation("dimer")
    spectrum = diagonalize(build_hamiltonian(params, trunc), k=trunc.eigenpairs)
    rows = level_table(spectrum, ctx.args.count)
    meta = ctx.metadata(trunc, phi_ext_over_Phi0=rad_to_phi0(params.coupler_flux[0]), solver=spectrum.solver)
    ctx.writer.csv("spectrum.csv", rows, meta)
    _print_table(rows)

    if ctx.args.dump:
        labels = PairLabels.default(params.mode_names).all()
        labeled = label_states(spectrum, labels, threshold=trunc.overlap_threshold)
        ctx.writer.text("eigenvectors.txt", eigenvector_dump(labeled, labels))

    if ctx.args.convergence:
        report = convergence_sweep(params, levels=tuple(ctx.args.levels), cutoff=trunc.cutoff)
        ctx.writer.csv("convergence.csv", report.rows(), meta)
        _print_table(report.rows(), title="truncation convergence")


def cmd_crosstalk(ctx: RunContext) -> None:
    trunc = ctx.truncation("dimer")
    model = ctx.model
    if ctx.args.sweep:
        grid = _flux_grid(ctx.config.sweep["crosstalk_Phi0"], "sweep.crosstalk_Phi0")
        reports = crosstalk_sweep(model, grid, trunc, rwa=ctx.args.rwa, threads=ctx.threads)
    else:
        phi = _flux_arg(ctx.args.flux, ctx.config.coupler_flux_Phi0)
        reports = [crosstalk_report(model.params_at(phi), trunc, rwa=ctx.args.rwa)]
    flagged = sum(1 for r in reports if r.flags)
    for report in reports:
        for flag in report.flags:
            logger.debug(f"phi_ext={report.phi_ext:.6f}: {flag}")

    rows = [r.as_row() for r in reports]
    ctx.writer.csv("crosstalk.csv", rows, ctx.metadata(trunc, rwa=ctx.args.rwa, flagged_points=flagged))

    if not ctx.args.sweep:
        _print_table(rows)
        zeros = geff_zeros(model.params_at(reports[0].phi_ext))
        print(
            f"g_eff zeros: omega_c+ = {zeros.plus / TWO_PI:.5f} GHz (eps {zeros.epsilon_plus:.3e}), "
            f"omega_c- = {zeros.minus / TWO_PI:.5f} GHz (eps {zeros.epsilon_minus:.3e}), branch {zeros.branch}"
        )
    else:
        print(f"{len(rows)} flux points, {flagged} flagged")


def _idle_search(ctx: RunContext, op_name: str = "idle_search"):
    idle = ctx.config.idle
    return find_idle_flux(
        ctx.model,
        window=ctx.config.idle_window,
        objective=idle["objective"],
        trunc=ctx.truncation("dimer"),
        grid_points=int(idle["grid_points"]),
        xtol=float(idle["xtol"]),
        threads=ctx.threads,
        op_logger=ctx.operation(op_name),
    )


def cmd_idle_search(ctx: RunContext) -> None:
    trunc = ctx.truncation("dimer")
    result = _idle_search(ctx)
    row = {**result.as_row(), "objective": result.objective}
    meta = ctx.metadata(
        trunc,
        window_Phi0=list(ctx.config.idle["window_Phi0"]),
        evaluations=result.evaluations,
        degenerate=result.degenerate,
    )
    ctx.writer.csv("idle_point.csv", [row], meta)

    lines = [f"{key}: {value}" for key, value in row.items()]
    try:
        zeros = geff_zeros(ctx.model.params_at(result.phi_ext))
        lines.append(f"g_eff zero ({zeros.branch} branch): {zeros.chosen / TWO_PI:.5f} GHz")
        if zeros.full is not None:
            lines.append(f"g_eff zero incl. counter-rotating terms: {zeros.full / TWO_PI:.5f} GHz")
    except RegimeError as e:
        lines.append(f"g_eff zeros unavailable: {e}")
    lines += [f"flag: {flag}" for flag in result.flags]
    ctx.writer.text("idle_point.txt", "\n".join(lines) + "\n")
    print("\n".join(lines))


def cmd_zz_map(ctx: RunContext) -> None:
    settings = ctx.config.manifold
    trunc = ctx.truncation("dimer")
    start, stop, count = linspace_spec(settings["EJc_GHz"], "manifold.EJc_GHz")
    EJ_grid = ghz_to_angular(np.linspace(start, stop, count))
    alpha_grid = np.linspace(*linspace_spec(settings["alpha"], "manifold.alpha"))
    grid = zero_zz_manifold(
        ctx.config.circuit_spec(),
        EJ_grid,
        alpha_grid,
        window=ctx.config.idle_window,
        trunc=trunc,
        bisection_steps=int(settings["bisection_steps"]),
        threads=ctx.threads,
        op_logger=ctx.operation("zz_map"),
    )
    rows = []
    for cell in grid.cells():
        EJ = cell.pop("EJc")
        rows.append({"EJc_GHz": EJ / TWO_PI, **cell})
    meta = ctx.metadata(trunc, window_Phi0=list(ctx.config.idle["window_Phi0"]))
    ctx.writer.csv("zz_map.csv", rows, meta)
    ctx.writer.csv(
        "zz_contour.csv",
        [{"EJc_GHz": EJ / TWO_PI, "alpha": alpha} for EJ, alpha in grid.contour],
        meta,
        columns=["EJc_GHz", "alpha"],
    )
    print(f"{grid.zeta.size} cells, {len(grid.contour)} zero-ZZ contour points")


def cmd_robustness(ctx: RunContext) -> None:
    settings = ctx.config.robustness
    trunc = ctx.truncation("dimer")
    d_EC = np.linspace(*linspace_spec(settings["d_EC"], "robustness.d_EC"))
    d_EJ = np.linspace(*linspace_spec(settings["d_EJ"], "robustness.d_EJ"))
    grid = robustness_grid(
        ctx.config.circuit_spec(),
        d_EC,
        d_EJ,
        window=ctx.config.idle_window,
        trunc=trunc,
        objective=settings["objective"],
        threads=ctx.threads,
        op_logger=ctx.operation("robustness"),
    )
    fraction = grid.fraction(SUPPRESSED_ZETA, SUPPRESSED_EPSILON)
    meta = ctx.metadata(trunc, objective=settings["objective"], suppressed_fraction=fraction)
    ctx.writer.csv("robustness.csv", grid.cells(), meta)
    print(f"{fraction:.1%} of {grid.zeta.size} cells reach |zeta| < 1 kHz with epsilon < {SUPPRESSED_EPSILON:g}")


def gate_settings(config: Config, scheme: Optional[str] = None, populations: bool = False) -> GateSettings:
    """GateSettings from the gate section; unset seeds stay None and are derived from physics."""
    gate = config.gate

    def angular(key: str) -> Optional[float]:
        return None if gate.get(key) is None else ghz_to_angular(float(gate[key]))

    bounds = gate.get("omega_int_bounds_GHz")
    return GateSettings.for_scheme(
        scheme or gate["scheme"],
        t_gate=gate.get("t_gate_ns"),
        tau=gate.get("tau_ns"),
        omega_int=angular("omega_int_GHz"),
        omega_q1_int=angular("omega_q1_int_GHz"),
        dt=gate.get("dt_ns"),
        optimize_dt=gate.get("optimize_dt_ns"),
        sample_dt=gate.get("sample_dt_ns"),
        tau_coherence_us=gate.get("tau_coherence_us"),
        leakage_weight=gate.get("leakage_weight"),
        max_evaluations=gate.get("max_evaluations"),
        objective_target=gate.get("objective_target"),
        omega_int_bounds=tuple(ghz_to_angular(float(b)) for b in bounds) if bounds else None,
        check_convergence=gate.get("check_convergence"),
        populations=populations,
    )


def cmd_gate(ctx: RunContext) -> None:
    settings = gate_settings(ctx.config, ctx.args.scheme, ctx.args.populations)
    if ctx.args.idle_flux is not None:
        idle_flux = phi0_to_rad(ctx.args.idle_flux)
    else:
        idle_flux = _idle_search(ctx).phi_ext
    trunc = ctx.truncation("gate")
    report = simulate_gate(
        ctx.model,
        idle_flux,
        settings,
        trunc=trunc,
        optimize=ctx.args.optimize,
        op_logger=ctx.operation("gate") if ctx.args.optimize else None,
    )
    meta = ctx.metadata(trunc, scheme=settings.scheme, t_gate_ns=settings.t_gate, dt_ns=report.dt)
    ctx.writer.text("gate_report.txt", f"idle_flux_over_Phi0: {rad_to_phi0(idle_flux):.10g}\n" + report.as_text())
    if report.pulse is not None:
        ctx.writer.csv("gate_pulse.csv", report.pulse.rows(), meta)
    if report.populations is not None:
        ctx.writer.csv("gate_populations.csv", report.populations.rows(), meta)
    elif ctx.args.populations:
        logger.warning("Population trace unavailable: states could not be labeled at the idle point")
    if len(report.trace) > 1:
        trace_rows = []
        for k, (x, value) in enumerate(report.trace):
            row = {"evaluation": k + 1}
            for name, v in x.items():
                row[f"{name}_GHz" if name.startswith("omega") else f"{name}_ns"] = (
                    v / TWO_PI if name.startswith("omega") else v
                )
            row["objective"] = value
            trace_rows.append(row)
        ctx.writer.csv("gate_optimizer.csv", trace_rows, meta)

    summary = report.summary()
    print(f"scheme {summary['scheme']}: infidelity {report.infidelity:.3e}, leakage {report.leakage:.3e}")
    print(f"decoherence estimate {report.decoherence:.3e}, evaluations {report.evaluations}")
    for name, value in report.parameters_out().items():
        print(f"  {name} = {value:.6g}")


def cmd_chain_scan(ctx: RunContext) -> None:
    settings = ctx.config.chain
    frequencies = [ghz_to_angular(float(w)) for w in settings["qubit_frequencies_GHz"]]
    dimer_trunc = ctx.config.truncation_policy("dimer")
    chain_trunc = ctx.truncation("chain")
    window = ctx.config.idle_window

    spec = ChainSpec.from_dimer(ctx.config.circuit_spec(), frequencies, adjust_shunts=bool(settings["adjust_shunts"]))
    spec = with_dimer_idle_fluxes(spec, window=window, trunc=dimer_trunc, threads=ctx.threads)
    model = ChainModel(spec)
    op_logger = ctx.operation("chain_scan")
    op_logger.info("chain prepared", qubits=spec.n_qubits, shunts_fF=[c / 1e-15 for c in model.shunts])

    pairs = ctx.args.pairs if ctx.args.pairs else list(range(len(spec.links)))
    grid = np.linspace(window[0], window[1], int(settings["sweep_points"]))
    meta = ctx.metadata(chain_trunc, qubits=spec.n_qubits, solver=settings["solver"])
    summary = []
    for k in pairs:
        report = pairwise_idle_scan(
            model, k, grid, chain_trunc, dimer_trunc=dimer_trunc, solver=settings["solver"], threads=ctx.threads
        )
        ctx.writer.csv(f"chain_pair{k}.csv", report.rows(), {**meta, "pair": f"q{k}-q{k + 1}"})
        points = report.idle_points()
        dimer_omega = CircuitModel(spec.dimer_spec(k)).params_at().frequency("c")
        chain_omega = report.idle_omega if report.idle_omega is not None else float("nan")
        summary.append(
            {
                "pair": k,
                "omega_c_dimer_idle_GHz": dimer_omega / TWO_PI,
                "omega_c_chain_idle_GHz": chain_omega / TWO_PI,
                "shift_MHz": (chain_omega - dimer_omega) / TWO_PI * 1e3,
                "zeta_chain_idle_kHz": (
                    report.idle_zeta / TWO_PI * 1e6 if report.idle_zeta is not None else float("nan")
                ),
                "eps_min_chain_GHz": points["epsilon_chain"] / TWO_PI,
                "eps_min_dimer_GHz": points["epsilon_dimer"] / TWO_PI,
            }
        )
        op_logger.info("pair scanned", pair=k, flags=len(report.flags))
    ctx.writer.csv("chain_idle.csv", summary, meta)
    _print_table(summary)


COMMANDS: Dict[str, Callable[[RunContext], None]] = {
    "device-params": cmd_device_params,
    "coupler-spectrum": cmd_coupler_spectrum,
    "spectrum": cmd_spectrum,
    "crosstalk": cmd_crosstalk,
    "idle-search": cmd_idle_search,
    "zz-map": cmd_zz_map,
    "robustness": cmd_robustness,
    "gate": cmd_gate,
    "chain-scan": cmd_chain_scan,
}


# ===== PARSER =====


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="decoupler", description="Tunable-coupler circuit simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", default=str(DEFAULT_CONFIG_FILE), help="YAML config (default: paper.yaml)")
    parser.add_argument("--out-dir", help="Output directory (default: runtime.out_dir/<subcommand>)")
    parser.add_argument("--threads", type=int, help="Worker threads (default: DECOUPLER_THREADS or 1)")
    parser.add_argument("--truncation", help="Levels per mode, optionally with excitation cutoff: N or N:CUTOFF")
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="Override a config value in dot notation, e.g. gate.t_gate_ns=40")
    parser.add_argument("--strict", action="store_true", help="Treat preflight warnings as errors")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING, ERROR")
    parser.add_argument("--json-logs", action="store_true", help="JSON log lines on stderr")
    parser.add_argument("--log-file", help="Also write JSON logs to this file")

    subparsers = parser.add_subparsers(dest="command", required=True)

    p = subparsers.add_parser("device-params", help="Derived device parameters")
    p.add_argument("--flux", type=float, help="Coupler flux in Phi0 (default: coupler.flux_Phi0)")

    p = subparsers.add_parser("coupler-spectrum", help="Coupler spectrum versus flux")
    p.add_argument("--oracle", action="store_true", help="Add exact single-mode diagonalization columns")

    p = subparsers.add_parser("spectrum", help="Lowest dressed levels")
    p.add_argument("--flux", type=float, help="Coupler flux in Phi0")
    p.add_argument("--count", type=int, default=12, help="Number of levels to list")
    p.add_argument("--dump", action="store_true", help="Write labeled computational eigenvectors")
    p.add_argument("--convergence", action="store_true", help="Repeat zeta/epsilon at increasing truncation")
    p.add_argument("--levels", type=int, nargs="+", default=[5, 6, 7], help="Levels for --convergence")

    p = subparsers.add_parser("crosstalk", help="ZZ crosstalk and delocalization")
    p.add_argument("--flux", type=float, help="Coupler flux in Phi0")
    p.add_argument("--sweep", action="store_true", help="Sweep sweep.crosstalk_Phi0 instead of one flux")
    p.add_argument("--rwa", action="store_true", help="Drop counter-rotating terms")

    subparsers.add_parser("idle-search", help="Find the idle flux")
    subparsers.add_parser("zz-map", help="Zero-ZZ manifold over coupler designs")
    subparsers.add_parser("robustness", help="Fabrication-error robustness grid")

    p = subparsers.add_parser("gate", help="CZ gate simulation")
    p.add_argument("--scheme", choices=["cz40", "cz-fast"], help="Gate scheme (default: gate.scheme)")
    p.add_argument("--optimize", action="store_true", help="Optimize the pulse parameters")
    p.add_argument("--populations", action="store_true", help="Write state populations during the gate")
    p.add_argument("--idle-flux", type=float, help="Idle flux in Phi0 (default: run the idle search)")

    p = subparsers.add_parser("chain-scan", help="Pairwise idle points of a qubit chain")
    p.add_argument("--pairs", type=int, nargs="+", help="Link indices to scan (default: all)")

    return parser


# ===== ENTRY POINT =====


def _report_error(error: DecouplerError, json_logs: bool) -> int:
    print(f"error[{error.category}]: {error}", file=sys.stderr)
    if json_logs:
        record = {
            "error": error.category,
            "type": type(error).__name__,
            "message": str(error),
            "exit_code": error.exit_code,
        }
        print(json.dumps(record), file=sys.stderr)
    return error.exit_code


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run one subcommand and return the exit status."""
    args = build_parser().parse_args(argv)

    env = os.environ.get("DECOUPLER_ENV", "development")
    setup_logging(
        level=args.log_level or os.environ.get("LOG_LEVEL"),
        json_logs=args.json_logs or env == "production",
        log_file=args.log_file,
    )

    writer: Optional[ArtifactWriter] = None
    try:
        config = Config(Path(args.config))
        config.apply_overrides(args.overrides)
        if args.truncation:
            config.truncation_policy("dimer", args.truncation)

        out_dir = Path(args.out_dir) if args.out_dir else config.output_dir / args.command
        passed, _ = run_preflight(config, out_dir, strict=args.strict)
        if not passed:
            raise ConfigError("Preflight validation failed; see the messages above")

        threads = args.threads or config.threads
        manifest = RunManifest(
            command=" ".join(["decoupler"] + list(argv if argv is not None else sys.argv[1:])),
            config=config.to_dict(),
            version=__version__,
            settings={"threads": threads, "truncation": args.truncation, "overrides": list(args.overrides)},
        )
        writer = ArtifactWriter(out_dir, manifest)
        ctx = RunContext(args=args, config=config, writer=writer, threads=threads)

        with LogContext(run_id=manifest.run_id, command=args.command):
            logger.info(f"Running {args.command} (config {config.config_path}, {threads} thread(s))")
            try:
                COMMANDS[args.command](ctx)
            finally:
                for op_logger in ctx.operations:
                    writer.add_operation(op_logger.get_summary())
        writer.finish("ok")
        return 0

    except DecouplerError as e:
        if writer is not None:
            writer.finish(f"failed: {e.category}")
        return _report_error(e, args.json_logs)
