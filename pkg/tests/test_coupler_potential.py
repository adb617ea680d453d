"""
Tests for the C-shunt flux coupler: potential minimum, Taylor expansion,
Duffing quantization and flux sweeps.
"""

import numpy as np
import pytest
from scipy import linalg

from decoupler.circuit.coupler import (
    PERIOD,
    CouplerSpec,
    coupler_frequency,
    coupler_mode,
    curvature,
    exact_mode_params,
    find_minimum,
    frequency_to_flux,
    mode_params,
    potential,
    spectrum_vs_flux,
    stationarity,
    taylor_coefficients,
)
from decoupler.constants import TWO_PI, ghz_to_angular
from decoupler.errors import OutOfRegimeError, UnreachableFrequencyError

EJ = ghz_to_angular(41.2)
ALPHA = 0.2347


@pytest.fixture
def coupler(reference_model):
    """Reference coupler at half a flux quantum."""
    return CouplerSpec(EJ=EJ, alpha=ALPHA, EC=reference_model.EC_cc, phi_ext=np.pi)


def test_minimum_at_half_flux_quantum_is_origin(coupler):
    """Test that the symmetric bias puts the minimum at phi = 0 with no cubic term."""
    phi_min = find_minimum(coupler)
    coeffs = taylor_coefficients(coupler, phi_min)

    assert phi_min == pytest.approx(0.0, abs=1e-9)
    assert coeffs.c3 == pytest.approx(0.0, abs=1e-9 * EJ)


@pytest.mark.parametrize("flux", [0.0, 0.3, 0.6, 0.9, 1.0, 1.4, 1.7])
def test_minimum_is_stationary_with_positive_curvature(coupler, flux):
    """Test the stationarity residual and curvature at the accepted minimum."""
    spec = coupler.at_flux(flux * np.pi)
    phi_min = find_minimum(spec)

    assert abs(stationarity(phi_min, spec)) < 1e-12
    assert curvature(phi_min, spec) > 0.0
    grid = np.linspace(-np.pi * np.sqrt(2.0), np.pi * np.sqrt(2.0), 20001)
    assert potential(phi_min, spec) <= potential(grid, spec).min() + 1e-9 * EJ


@pytest.mark.parametrize("flux", [0.2, 0.6, 1.0, 1.35])
def test_taylor_coefficients_match_finite_differences(coupler, flux):
    """Test c2, c3 and c4 against central differences of the potential."""
    spec = coupler.at_flux(flux * np.pi)
    coeffs = taylor_coefficients(spec)
    x0, h = coeffs.phi_min, 1e-2

    def V(k):
        return float(potential(x0 + k * h, spec))

    second = (V(1) - 2 * V(0) + V(-1)) / h**2
    third = (V(2) - 2 * V(1) + 2 * V(-1) - V(-2)) / (2 * h**3)
    fourth = (V(2) - 4 * V(1) + 6 * V(0) - 4 * V(-1) + V(-2)) / h**4

    assert coeffs.c2 == pytest.approx(second / 2.0, abs=1e-4 * EJ)
    assert coeffs.c3 == pytest.approx(third / 6.0, abs=1e-4 * EJ)
    assert coeffs.c4 == pytest.approx(fourth / 24.0, abs=1e-4 * EJ)


@pytest.mark.physics
def test_duffing_parameters_at_half_flux_quantum(coupler):
    """Test the closed-form harmonic frequency and anharmonicity at phi_ext = pi."""
    mode = coupler_mode(coupler)
    stiffness = EJ * (1.0 - 2.0 * ALPHA)
    c4 = EJ * (4.0 * ALPHA - 0.5) / 24.0
    phi_zpf = (2.0 * coupler.EC / stiffness) ** 0.25

    assert mode.omega_harmonic == pytest.approx(np.sqrt(8.0 * coupler.EC * stiffness), rel=1e-9)
    assert mode.anharmonicity == pytest.approx(12.0 * c4 * phi_zpf**4, rel=1e-9)
    assert mode.anharmonicity > 0.0
    assert mode.cubic == pytest.approx(0.0, abs=1e-9)
    assert mode.n_zpf * mode.phi_zpf == pytest.approx(0.5, rel=1e-9)


@pytest.mark.physics
@pytest.mark.parametrize(
    "flux, omega_GHz, U_MHz",
    [(0.5, 5.070, 87.5), (0.45, 5.292, 31.0), (0.4, 5.795, -58.1), (0.3, 6.836, None), (0.0, 8.1285, None)],
)
def test_exact_mode_params_reference_values(coupler, flux, omega_GHz, U_MHz):
    """Test the cosine-potential levels of the reference coupler across the flux range."""
    exact = exact_mode_params(coupler.at_flux(TWO_PI * flux))

    assert exact.omega / TWO_PI == pytest.approx(omega_GHz, rel=2e-3)
    if U_MHz is not None:
        assert exact.anharmonicity / TWO_PI * 1e3 == pytest.approx(U_MHz, rel=1e-2)
    assert exact.cubic == 0.0


def _grid_levels(spec, points=1200):
    """Three lowest levels of 4 EC n^2 + V on a periodic finite-difference grid over one period."""
    h = PERIOD / points
    phi = find_minimum(spec) + (np.arange(points) - points // 2) * h
    laplacian = -2.0 * np.eye(points) + np.eye(points, k=1) + np.eye(points, k=-1)
    laplacian[0, -1] = laplacian[-1, 0] = 1.0
    H = -4.0 * spec.EC * laplacian / h**2 + np.diag(potential(phi, spec))
    return linalg.eigh(H, eigvals_only=True, subset_by_index=[0, 2])


@pytest.mark.physics
@pytest.mark.parametrize("flux", [0.0, 0.2, 0.35, 0.4, 0.45, 0.48, 0.5, 0.6])
def test_exact_mode_params_matches_periodic_grid(coupler, flux):
    """Test the plane-wave diagonalization against a periodic grid limited to one well."""
    spec = coupler.at_flux(TWO_PI * flux)
    levels = _grid_levels(spec)
    exact = exact_mode_params(spec)

    assert exact.omega == pytest.approx(levels[1] - levels[0], rel=2e-3)
    assert exact.anharmonicity == pytest.approx(levels[2] - 2 * levels[1] + levels[0], abs=TWO_PI * 1e-3)


@pytest.mark.physics
def test_duffing_mode_agrees_with_exact_diagonalization(coupler):
    """Test that the quartic expansion keeps the frequency but not the anharmonicity near pi."""
    duffing = coupler_mode(coupler, "taylor")
    exact = exact_mode_params(coupler)

    assert duffing.omega == pytest.approx(exact.omega, rel=0.005)
    assert duffing.anharmonicity / TWO_PI * 1e3 == pytest.approx(116.7, abs=1.0)
    assert exact.anharmonicity / TWO_PI * 1e3 == pytest.approx(87.5, abs=1.0)


def test_exact_model_is_the_configured_default(coupler, reference_params):
    """Test that device parameters carry the cosine-potential levels, not the quartic ones."""
    exact = coupler_mode(coupler, "exact")

    assert reference_params.frequency("c") == pytest.approx(exact.omega, rel=1e-12)
    assert reference_params.anharmonicity_of("c") == pytest.approx(exact.anharmonicity, rel=1e-12)
    assert reference_params.cubic[reference_params.index("c")] == 0.0


def test_mirror_symmetry_of_flux(coupler):
    """Test that phi_ext and 2 pi - phi_ext give the same frequency and opposite cubic term."""
    left = coupler_mode(coupler.at_flux(0.8 * np.pi))
    right = coupler_mode(coupler.at_flux(1.2 * np.pi))

    assert left.omega == pytest.approx(right.omega, rel=1e-10)
    assert left.anharmonicity == pytest.approx(right.anharmonicity, rel=1e-9)
    assert left.cubic == pytest.approx(-right.cubic, rel=1e-9)
    assert find_minimum(coupler.at_flux(0.8 * np.pi)) == pytest.approx(
        -find_minimum(coupler.at_flux(1.2 * np.pi)), abs=1e-10
    )


def test_frequency_is_flux_periodic(coupler):
    """Test that omega_c(phi_ext + 2 pi) = omega_c(phi_ext)."""
    assert coupler_frequency(coupler, 0.7) == pytest.approx(coupler_frequency(coupler, 0.7 + TWO_PI), rel=1e-10)


@pytest.mark.parametrize("alpha", [0.1, 0.55])
def test_alpha_outside_single_well_window(coupler, alpha):
    """Test that alpha outside (1/8, 1/2) raises OutOfRegimeError."""
    spec = CouplerSpec(EJ=EJ, alpha=alpha, EC=coupler.EC, phi_ext=np.pi)

    with pytest.raises(OutOfRegimeError, match="single-well window"):
        find_minimum(spec)


def test_correction_flux_rescales_alpha(coupler):
    """Test that the correction SQUID flux lowers the effective alpha."""
    corrected = CouplerSpec(EJ=EJ, alpha=ALPHA, EC=coupler.EC, phi_ext=np.pi, phi_cor=np.pi / 3.0)

    assert corrected.alpha_eff == pytest.approx(ALPHA * np.cos(np.pi / 6.0))
    assert coupler_mode(corrected).omega > coupler_mode(coupler).omega


def test_non_positive_c2_rejected(coupler):
    """Test that mode_params refuses a non-confining expansion."""
    coeffs = taylor_coefficients(coupler)
    flat = type(coeffs)(phi_min=0.0, c2=0.0, c3=0.0, c4=coeffs.c4)

    with pytest.raises(OutOfRegimeError):
        mode_params(flat, coupler.EC)


def test_flux_sweep_anharmonicity_changes_sign(coupler):
    """Test that U_c is negative at zero flux and positive at half a flux quantum."""
    sweep = spectrum_vs_flux(coupler, np.linspace(0.0, np.pi, 21))

    assert sweep.valid.all()
    assert sweep.anharmonicity[0] < 0.0 < sweep.anharmonicity[-1]
    assert sweep.monotone_segments() == [(0, 20)]
    assert np.argmin(sweep.omega) == 20


def test_flux_sweep_rows_with_oracle(coupler):
    """Test that oracle columns appear in the rows only when requested."""
    plain = spectrum_vs_flux(coupler, [np.pi]).rows()
    oracle = spectrum_vs_flux(coupler, [np.pi], oracle=True).rows()

    assert "omega_c_exact_GHz" not in plain[0]
    assert oracle[0]["omega_c_exact_GHz"] == pytest.approx(oracle[0]["omega_c_GHz"], rel=0.01)
    assert plain[0]["phi_ext_over_Phi0"] == pytest.approx(0.5)


def test_frequency_to_flux_inverts_sweep(coupler):
    """Test that the branch inversion lands on the requested frequency."""
    target = ghz_to_angular(5.5)
    phi = frequency_to_flux(coupler, target)

    assert 0.0 < phi < np.pi
    assert coupler_frequency(coupler, phi) == pytest.approx(target, rel=1e-9)


def test_frequency_to_flux_unreachable(coupler):
    """Test that a target below the branch minimum raises UnreachableFrequencyError."""
    with pytest.raises(UnreachableFrequencyError) as excinfo:
        frequency_to_flux(coupler, ghz_to_angular(4.0))
    assert excinfo.value.branch == (0.0, np.pi)
