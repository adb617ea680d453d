"""
Pytest configuration and shared fixtures for Decoupler tests.
"""

import copy
import os
import sys

import numpy as np
import pytest
import yaml

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from decoupler.circuit.model import DIMER_MODES, CircuitModel, CircuitSpec, DeviceParams  # noqa: E402
from decoupler.constants import FEMTOFARAD, ghz_to_angular  # noqa: E402

PAPER_CONFIG = {
    "circuit": {
        "C1_fF": 85.0,
        "C2_fF": 85.0,
        "CC_fF": 30.0,
        "Cg_fF": 70.0,
        "C12_fF": 0.23,
        "C1c_fF": 7.9,
        "C2c_fF": 7.9,
    },
    "coupler": {"EJc_GHz": 41.2, "alpha": 0.2347, "flux_Phi0": 0.5},
    "qubits": {"q1": {"frequency_GHz": 6.6}, "q2": {"frequency_GHz": 6.1}},
    "truncation": {"dimer": {"levels": 4}, "gate": {"levels": 4, "cutoff": 4}},
    "runtime": {"threads": 1},
}


@pytest.fixture
def reference_config():
    """
    Raw configuration mapping of the reference device.

    Returns:
        dict: Deep copy, safe to modify in a test
    """
    return copy.deepcopy(PAPER_CONFIG)


@pytest.fixture
def config_file(tmp_path):
    """
    Factory writing a configuration mapping to a YAML file.

    Usage:
        path = config_file({"circuit": {...}, ...})
    """

    def _write(data, name="device.yaml"):
        path = tmp_path / name
        with open(path, "w") as f:
            yaml.dump(data, f)
        return path

    return _write


@pytest.fixture
def reference_spec():
    """CircuitSpec of the reference device with the coupler at half a flux quantum."""
    return CircuitSpec(
        C1=85.0 * FEMTOFARAD,
        C2=85.0 * FEMTOFARAD,
        CC=30.0 * FEMTOFARAD,
        Cg=70.0 * FEMTOFARAD,
        C12=0.23 * FEMTOFARAD,
        C1c=7.9 * FEMTOFARAD,
        C2c=7.9 * FEMTOFARAD,
        EJc=ghz_to_angular(41.2),
        alpha=0.2347,
        phi_ext_c=np.pi,
        qubit_targets=(ghz_to_angular(6.6), ghz_to_angular(6.1)),
    )


@pytest.fixture
def reference_model(reference_spec):
    return CircuitModel(reference_spec)


@pytest.fixture
def reference_params(reference_model):
    """DeviceParams of the reference device at phi_ext = pi."""
    return reference_model.params_at()


def make_device(
    omega_GHz=(6.0, 4.8, 5.5),
    anharmonicity_GHz=(-0.25, 0.2, -0.25),
    g12_MHz=0.0,
    g1c_MHz=20.0,
    g2c_MHz=20.0,
    cubic_GHz=(0.0, 0.0, 0.0),
):
    """
    Hand-specified dimer DeviceParams over (q1, c, q2).

    Frequencies in GHz and couplings in MHz, converted to rad/ns.
    """
    coupling = np.zeros((3, 3))
    for (a, b), value in (((0, 2), g12_MHz), ((0, 1), g1c_MHz), ((1, 2), g2c_MHz)):
        coupling[a, b] = coupling[b, a] = ghz_to_angular(value * 1e-3)
    return DeviceParams(
        mode_names=DIMER_MODES,
        omega=ghz_to_angular(np.array(omega_GHz, dtype=float)),
        anharmonicity=ghz_to_angular(np.array(anharmonicity_GHz, dtype=float)),
        cubic=ghz_to_angular(np.array(cubic_GHz, dtype=float)),
        n_zpf=np.ones(3),
        phi_zpf=np.ones(3),
        coupling=coupling,
    )


@pytest.fixture
def synthetic_device():
    """
    Factory for hand-specified dimers.

    Usage:
        params = synthetic_device(g12_MHz=5.0, g1c_MHz=0.0, g2c_MHz=0.0)
    """
    return make_device


@pytest.fixture
def rng():
    """Seeded random generator."""
    return np.random.default_rng(20240617)
