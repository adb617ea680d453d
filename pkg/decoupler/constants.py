"""
Constants - Shared physical constants, unit conversions and defaults

Internal computations use angular frequency in rad/ns and time in ns, so that
exp(-i H t) needs no extra factors. Everything that crosses the I/O boundary
(config files, CSV columns) is in linear GHz, fF and flux quanta.
"""

import os
from pathlib import Path

import numpy as np

# Package directories
PACKAGE_DIR = Path(__file__).parent
PROJECT_DIR = PACKAGE_DIR.parent
DEFAULT_CONFIG_FILE = PROJECT_DIR / "paper.yaml"
DEFAULT_OUTPUT_DIR = PROJECT_DIR / "results"

# Exact SI values
ELEMENTARY_CHARGE = 1.602176634e-19  # C
PLANCK = 6.62607015e-34  # J s

FEMTOFARAD = 1e-15
TWO_PI = 2.0 * np.pi

# e^2 / (2 h) in GHz * fF, i.e. E_C/h = CHARGING_GHZ_FF / C[fF]
CHARGING_GHZ_FF = ELEMENTARY_CHARGE**2 / (2.0 * PLANCK) / 1e9 / FEMTOFARAD

# Numerical tolerances
POLE_TOLERANCE = TWO_PI * 1e-3  # 1 MHz in rad/ns
STATIONARITY_TOLERANCE = 1e-12
MINIMUM_GRID_POINTS = 4096
OVERLAP_THRESHOLD = 0.5
UNITARITY_TOLERANCE = 1e-8
EIGEN_RESIDUAL_TOLERANCE = 1e-10

# Single-well window for the coupler junction ratio
ALPHA_MIN = 1.0 / 8.0
ALPHA_MAX = 1.0 / 2.0

# Truncation defaults
DEFAULT_DIMER_LEVELS = 6
DEFAULT_GATE_LEVELS = 6
DEFAULT_GATE_CUTOFF = 5
DEFAULT_CHAIN_LEVELS = 4
DEFAULT_CHAIN_CUTOFF = 6
DEFAULT_CHAIN_EIGENPAIRS = 60
DEFAULT_MAX_DIMENSION = 20000
DENSE_DIMENSION_LIMIT = 2500

# Charge-to-Josephson ratio above which the Duffing expansion is flagged
EC_EJ_WARNING_RATIO = 0.1


def ghz_to_angular(frequency_ghz):
    """Convert linear GHz to angular rad/ns."""
    return TWO_PI * frequency_ghz


def angular_to_ghz(omega):
    """Convert angular rad/ns to linear GHz."""
    return omega / TWO_PI


def phi0_to_rad(flux_phi0):
    """Convert flux in units of the flux quantum to phase 2*pi*Phi/Phi0."""
    return TWO_PI * flux_phi0


def rad_to_phi0(phase):
    """Convert a reduced flux phase back to flux quanta."""
    return phase / TWO_PI


def default_thread_count() -> int:
    """Thread count from DECOUPLER_THREADS, falling back to 1."""
    value = os.environ.get("DECOUPLER_THREADS", "")
    try:
        return max(1, int(value))
    except ValueError:
        return 1
