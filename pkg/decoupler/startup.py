"""
Preflight validation for Decoupler runs.

Checks the configured circuit, truncations and output directory before a
subcommand starts any numerics.
"""

import os
from pathlib import Path
from typing import Callable, List, Optional, Tuple

import numpy as np

from decoupler.circuit.coupler import CouplerSpec
from decoupler.circuit.model import CircuitModel
from decoupler.config import TRUNCATION_KINDS, Config
from decoupler.constants import ALPHA_MAX, ALPHA_MIN, rad_to_phi0
from decoupler.errors import DecouplerError, OutOfRegimeError
from decoupler.logging_config import get_logger

logger = get_logger(__name__)


class ValidationResult:
    """Result of a validation check."""

    def __init__(
        self,
        name: str,
        passed: bool,
        message: str,
        severity: str = "error",  # error, warning, info
        fix_hint: Optional[str] = None,
    ):
        self.name = name
        self.passed = passed
        self.message = message
        self.severity = severity
        self.fix_hint = fix_hint

    def __str__(self) -> str:
        status = "PASS" if self.passed else self.severity.upper()
        return f"[{status}] {self.name}: {self.message}"


def validate_circuit(config: Config) -> List[ValidationResult]:
    """
    Coupler regime, capacitance hierarchy and transmon regime.

    Returns:
        List of validation results
    """
    results = []

    alpha = config.coupler_alpha
    if ALPHA_MIN < alpha < ALPHA_MAX:
        results.append(
            ValidationResult(
                name="Coupler Regime",
                passed=True,
                message=f"alpha = {alpha:.4f} is in the single-well window",
                severity="info",
            )
        )
    else:
        results.append(
            ValidationResult(
                name="Coupler Regime",
                passed=False,
                message=f"alpha = {alpha:.4f} outside ({ALPHA_MIN}, {ALPHA_MAX}); the potential has several wells",
                severity="error",
                fix_hint="Set coupler.alpha between 0.125 and 0.5",
            )
        )
        return results

    try:
        model = CircuitModel(config.circuit_spec())
    except DecouplerError as e:
        results.append(
            ValidationResult(
                name="Circuit Model",
                passed=False,
                message=str(e),
                severity="error",
                fix_hint="Check the capacitances and qubit sections",
            )
        )
        return results

    if model.warnings:
        for message in model.warnings:
            results.append(
                ValidationResult(name="Circuit Model", passed=False, message=message, severity="warning")
            )
    else:
        results.append(
            ValidationResult(
                name="Circuit Model",
                passed=True,
                message=f"Charging matrix condition number {model.charging.condition_number:.3g}",
                severity="info",
            )
        )
    return results


def validate_flux_window(config: Config) -> List[ValidationResult]:
    """The idle window must stay on one monotone half period of the coupler spectrum."""
    low, high = config.idle_window
    low_phi0, high_phi0 = rad_to_phi0(low), rad_to_phi0(high)
    half_low, half_high = np.floor(2 * low_phi0), np.ceil(2 * high_phi0)
    if not low < high:
        return [
            ValidationResult(
                name="Idle Window",
                passed=False,
                message=f"Empty flux window [{low_phi0}, {high_phi0}] Phi0",
                severity="error",
                fix_hint="idle.window_Phi0 must be [low, high] with low < high",
            )
        ]
    if half_high - half_low > 1:
        return [
            ValidationResult(
                name="Idle Window",
                passed=False,
                message=f"Flux window [{low_phi0}, {high_phi0}] Phi0 spans more than half a flux quantum period",
                severity="error",
                fix_hint="Keep idle.window_Phi0 inside [0, 0.5] or [0.5, 1]",
            )
        ]

    spec = CouplerSpec(EJ=1.0, alpha=config.coupler_alpha, EC=1.0, phi_ext=low)
    try:
        for phi in (low, high):
            spec.at_flux(phi).validate()
    except OutOfRegimeError as e:
        return [ValidationResult(name="Idle Window", passed=False, message=str(e), severity="error")]
    return [
        ValidationResult(
            name="Idle Window",
            passed=True,
            message=f"Flux window [{low_phi0:.4f}, {high_phi0:.4f}] Phi0",
            severity="info",
        )
    ]


def validate_truncation(config: Config) -> List[ValidationResult]:
    """Level counts, cutoffs and dimension budgets of every truncation section."""
    results = []
    modes = {"dimer": 3, "gate": 3, "chain": 2 * len(config.chain["qubit_frequencies_GHz"]) - 1}
    for kind in TRUNCATION_KINDS:
        try:
            policy = config.truncation_policy(kind)
            policy.validate(modes[kind])
            dimension = policy.dimension(modes[kind])
        except DecouplerError as e:
            results.append(
                ValidationResult(name=f"Truncation: {kind}", passed=False, message=str(e), severity="error")
            )
            continue
        if dimension > policy.max_dim:
            results.append(
                ValidationResult(
                    name=f"Truncation: {kind}",
                    passed=False,
                    message=f"{dimension} states exceed the budget of {policy.max_dim}",
                    severity="error" if kind != "chain" else "warning",
                    fix_hint=f"Lower truncation.{kind}.levels or set an excitation cutoff",
                )
            )
        else:
            results.append(
                ValidationResult(
                    name=f"Truncation: {kind}",
                    passed=True,
                    message=f"{dimension} states",
                    severity="info",
                )
            )
    return results


def validate_output_dir(out_dir: Path) -> List[ValidationResult]:
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        return [
            ValidationResult(
                name="Output Directory",
                passed=False,
                message=f"Cannot create output directory {out_dir}: {e}",
                severity="error",
                fix_hint="Pass a writable --out-dir",
            )
        ]
    if not os.access(out_dir, os.W_OK):
        return [
            ValidationResult(
                name="Output Directory",
                passed=False,
                message=f"No write permission for {out_dir}",
                severity="error",
                fix_hint="Pass a writable --out-dir",
            )
        ]
    return [ValidationResult(name="Output Directory", passed=True, message=str(out_dir), severity="info")]


def run_preflight(
    config: Config, out_dir: Path, strict: bool = False, log_results: bool = True
) -> Tuple[bool, List[ValidationResult]]:
    """
    Run all preflight validations.

    Args:
        config: Loaded configuration (overrides applied)
        out_dir: Directory the run will write to
        strict: If True, treat warnings as errors
        log_results: If True, log validation results

    Returns:
        Tuple of (all_passed, results)
    """
    all_results = []

    validators: List[Tuple[str, Callable[[], List[ValidationResult]]]] = [
        ("Circuit", lambda: validate_circuit(config)),
        ("Flux Window", lambda: validate_flux_window(config)),
        ("Truncation", lambda: validate_truncation(config)),
        ("Output", lambda: validate_output_dir(out_dir)),
    ]

    for category, validator in validators:
        try:
            all_results.extend(validator())
        except Exception as e:
            all_results.append(
                ValidationResult(
                    name=f"{category} Validation",
                    passed=False,
                    message=f"Validation failed with error: {e}",
                    severity="error",
                )
            )

    if log_results:
        for result in all_results:
            if result.passed:
                logger.debug(str(result))
            elif result.severity == "error":
                logger.error(str(result))
                if result.fix_hint:
                    logger.error(f"  Hint: {result.fix_hint}")
            elif result.severity == "warning":
                logger.warning(str(result))
                if result.fix_hint:
                    logger.warning(f"  Hint: {result.fix_hint}")
            else:
                logger.info(str(result))

    errors = [r for r in all_results if not r.passed and r.severity == "error"]
    warnings = [r for r in all_results if not r.passed and r.severity == "warning"]

    if errors:
        logger.error(f"Preflight validation failed with {len(errors)} error(s)")
        return False, all_results

    if strict and warnings:
        logger.error(f"Preflight validation failed with {len(warnings)} warning(s) (strict mode)")
        return False, all_results

    logger.debug("Preflight validation passed")
    return True, all_results
