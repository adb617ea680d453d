"""
Two-qubit gate dynamics under flux pulses.

Usage:
    from decoupler.gates import GateSettings, simulate_gate

    settings = GateSettings.for_scheme("cz40")
    report = simulate_gate(model, idle_flux, settings, optimize=True)
    print(report.infidelity, report.leakage)
"""

from .metrics import (
    CZ,
    ComputationalUnitary,
    compensate,
    computational_basis,
    computational_unitary,
    decoherence_estimate,
    leakage,
    process_infidelity,
)
from .optimize import (
    POPULATION_LABELS,
    SCHEMES,
    GateReport,
    GateSettings,
    GateSimulator,
    PopulationTrace,
    PulseTrace,
    optimize_pulse,
    simulate_gate,
)
from .propagation import ParameterSchedule, Propagation, check_step_convergence, propagate, unitarity_defect
from .pulses import CouplerBranch, FluxSchedule, PulseSpec, flattop, flux_schedule

__all__ = [
    "CZ",
    "ComputationalUnitary",
    "compensate",
    "computational_basis",
    "computational_unitary",
    "decoherence_estimate",
    "leakage",
    "process_infidelity",
    "POPULATION_LABELS",
    "SCHEMES",
    "GateReport",
    "GateSettings",
    "GateSimulator",
    "PopulationTrace",
    "PulseTrace",
    "optimize_pulse",
    "simulate_gate",
    "ParameterSchedule",
    "Propagation",
    "check_step_convergence",
    "propagate",
    "unitarity_defect",
    "CouplerBranch",
    "FluxSchedule",
    "PulseSpec",
    "flattop",
    "flux_schedule",
]
