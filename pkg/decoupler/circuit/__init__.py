"""
Circuit package - lumped-element model of the tunable-coupler dimer

Exports the circuit description, the coupler potential solver and the
quantized mode parameters.
"""

from .coupler import (
    CouplerModeParams,
    CouplerSpec,
    FluxSweep,
    TaylorCoefficients,
    coupler_frequency,
    coupler_mode,
    exact_mode_params,
    find_minimum,
    frequency_to_flux,
    mode_params,
    potential,
    spectrum_vs_flux,
    taylor_coefficients,
)
from .model import (
    CapacitanceMatrix,
    ChargingEnergyMatrix,
    CircuitModel,
    CircuitSpec,
    DeviceParams,
    TunableJunction,
    build_capacitance_matrix,
    calibrate_qubit_EJ,
    derive_device_params,
    effective_qubit_EJ,
    quantize_modes,
    qubit_flux_for_frequency,
    transform_and_invert,
)

__all__ = [
    "CapacitanceMatrix",
    "ChargingEnergyMatrix",
    "CircuitModel",
    "CircuitSpec",
    "CouplerModeParams",
    "CouplerSpec",
    "DeviceParams",
    "FluxSweep",
    "TaylorCoefficients",
    "TunableJunction",
    "build_capacitance_matrix",
    "calibrate_qubit_EJ",
    "coupler_frequency",
    "coupler_mode",
    "derive_device_params",
    "effective_qubit_EJ",
    "exact_mode_params",
    "find_minimum",
    "frequency_to_flux",
    "mode_params",
    "potential",
    "quantize_modes",
    "qubit_flux_for_frequency",
    "spectrum_vs_flux",
    "taylor_coefficients",
    "transform_and_invert",
]
