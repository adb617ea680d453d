"""
Error hierarchy for Decoupler.

Every failure that the command line reports maps onto one of three
categories, each with its own exit code:

    config     (exit 2)  malformed configuration or invalid circuit description
    regime     (exit 3)  the requested physics is outside the model's validity
    numerical  (exit 4)  a solver, search or integrator did not converge

Exceptions carry their diagnostics as attributes so callers can decide
whether to retry, flag a data point or abort.
"""

from typing import Any, List, Optional, Sequence, Tuple


class DecouplerError(Exception):
    """Base class for all errors raised by the package."""

    category = "internal"
    exit_code = 1


# ===== CONFIG =====


class ConfigError(DecouplerError):
    """Raised when a config file is missing, unparsable or incomplete."""

    category = "config"
    exit_code = 2


class InvalidSpecError(ConfigError):
    """Raised when a circuit description violates a hard invariant."""


# ===== REGIME =====


class RegimeError(DecouplerError):
    """Raised when parameters leave the regime the model describes."""

    category = "regime"
    exit_code = 3


class OutOfRegimeError(RegimeError):
    """Raised for a coupler outside its single-well window or with non-positive curvature."""


class MultiWellError(RegimeError):
    """Raised when the coupler potential has no unique minimum."""

    def __init__(self, message: str, brackets: Optional[Sequence[Tuple[float, float]]] = None):
        super().__init__(message)
        self.brackets = list(brackets or [])


class UnreachableFrequencyError(RegimeError):
    """Raised when a target frequency lies outside a tunable branch."""

    def __init__(self, message: str, target: float = float("nan"), branch: Tuple = ()):
        super().__init__(message)
        self.target = target
        self.branch = branch


class PoleError(RegimeError):
    """Raised when a perturbative denominator comes too close to zero."""

    def __init__(self, resonance: str, denominator: float):
        super().__init__(
            f"Perturbative pole at {resonance}: |denominator| = {abs(denominator):.3e} rad/ns"
        )
        self.resonance = resonance
        self.denominator = denominator


class DivergentSweetSpotError(RegimeError):
    """Raised when the sweet-spot bracket vanishes."""


class DegenerateCouplingError(RegimeError):
    """Raised when a closed form needs a nonzero direct coupling and gets none."""


class LabelingError(RegimeError):
    """Raised when dressed states cannot be assigned bare labels unambiguously."""

    def __init__(self, message: str, contested: Optional[List[Tuple[Any, int, float]]] = None):
        super().__init__(message)
        # (label, eigenindex, overlap weight)
        self.contested = list(contested or [])


# ===== NUMERICAL =====


class NumericalError(DecouplerError):
    """Raised when a numerical method fails to converge."""

    category = "numerical"
    exit_code = 4


class SingularMatrixError(NumericalError):
    """Raised when a capacitance matrix cannot be inverted reliably."""

    def __init__(self, message: str, condition_number: float = float("inf")):
        super().__init__(message)
        self.condition_number = condition_number


class EigensolverError(NumericalError):
    """Raised when diagonalization fails or residuals are too large."""

    def __init__(self, message: str, iterations: Optional[int] = None, residual: float = float("nan")):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class IntegrationError(NumericalError):
    """Raised when time propagation is not step-converged or loses unitarity."""


class SearchError(NumericalError):
    """Raised when an operating-point search keeps failing."""


class CompensationError(NumericalError):
    """Raised when virtual-Z compensation is unreliable because of gross leakage."""


class ResourceError(NumericalError):
    """Raised when a Hilbert space would exceed the configured size budget."""

    def __init__(self, dimension: int, budget: int):
        super().__init__(
            f"Hilbert space dimension {dimension} exceeds the budget of {budget}; "
            f"set an excitation cutoff (truncation.*.cutoff) or lower the levels per mode"
        )
        self.dimension = dimension
        self.budget = budget
