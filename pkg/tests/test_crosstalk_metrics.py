"""
Tests for crosstalk metrics.

Exact zeta and epsilon come from labeled spectra; the closed forms are
checked in limits where they are exact or where only one order survives.
"""

import numpy as np
import pytest

from decoupler.constants import TWO_PI, ghz_to_angular
from decoupler.crosstalk import (
    DetuningSet,
    PairLabels,
    convergence_sweep,
    crosstalk_report,
    crosstalk_sweep,
    delocalization_exact,
    dressed_spectrum,
    epsilon_perturbative,
    g_eff_sw,
    geff_zeros,
    uc_sweet_spot,
    zz_exact,
    zz_perturbative,
)
from decoupler.errors import DegenerateCouplingError, DivergentSweetSpotError, PoleError
from decoupler.fock import TruncationPolicy

GHZ = TWO_PI


def test_detuning_identity(rng):
    """Test that Delta_12 = Delta_1c - Delta_2c holds for every construction."""
    for w1, w2, wc in rng.uniform(3.0, 8.0, size=(50, 3)):
        dets = DetuningSet.from_frequencies(w1, w2, wc)
        assert dets.d12 == dets.d1c - dets.d2c
        assert dets.d21 == -dets.d12
        assert dets.s12 == pytest.approx(w1 + w2)


def test_pair_labels_of_dimer():
    """Test the default computational labels of the (q1, c, q2) dimer."""
    pair = PairLabels.default(("q1", "c", "q2"))

    assert pair.all() == [(0, 0, 0), (1, 0, 0), (0, 0, 1), (1, 0, 1)]
    assert PairLabels.for_pair(("a", "b", "c", "d"), "b", "c").both == (0, 1, 1, 0)


def test_uncoupled_device_has_no_crosstalk(reference_params):
    """Test that zeta and epsilon vanish when every coupling is zero."""
    labeled = dressed_spectrum(reference_params.scaled_couplings(0.0), TruncationPolicy(levels=4))

    assert zz_exact(labeled) == pytest.approx(0.0, abs=1e-10)
    assert delocalization_exact(labeled) == pytest.approx(0.0, abs=1e-20)


@pytest.mark.physics
def test_harmonic_limit_has_no_zz(synthetic_device):
    """Test that linear modes give zero ZZ, exactly and perturbatively."""
    params = synthetic_device(anharmonicity_GHz=(0.0, 0.0, 0.0), g12_MHz=5.0)
    labeled = dressed_spectrum(params, TruncationPolicy(levels=3), rwa=True)
    components = zz_perturbative(params)

    assert zz_exact(labeled) == pytest.approx(0.0, abs=1e-9)
    assert components.zeta2 == pytest.approx(0.0, abs=1e-15)
    assert components.total == pytest.approx(0.0, abs=1e-12)


@pytest.mark.physics
def test_direct_coupling_only_zz(synthetic_device):
    """Test that with g_1c = g_2c = 0 only the second-order term survives and matches exact."""
    params = synthetic_device(
        omega_GHz=(6.0, 4.0, 5.5),
        anharmonicity_GHz=(-0.3, -0.2, -0.3),
        g12_MHz=5.0,
        g1c_MHz=0.0,
        g2c_MHz=0.0,
    )
    components = zz_perturbative(params)
    g = ghz_to_angular(5e-3)
    expected = 2.0 * g**2 * (1.0 / ghz_to_angular(0.8) + 1.0 / ghz_to_angular(-0.2))

    assert components.zeta3 == 0.0
    assert components.zeta4 == 0.0
    assert components.zeta2 == pytest.approx(expected, rel=1e-12)

    labeled = dressed_spectrum(params, TruncationPolicy(levels=4), rwa=True)
    assert zz_exact(labeled) == pytest.approx(expected, rel=0.02)


@pytest.mark.physics
def test_direct_coupling_only_delocalization(synthetic_device):
    """Test epsilon = (g_12/Delta_12)^2 against the exact RWA overlap."""
    params = synthetic_device(g12_MHz=5.0, g1c_MHz=0.0, g2c_MHz=0.0)
    labeled = dressed_spectrum(params, TruncationPolicy(levels=3), rwa=True)

    assert epsilon_perturbative(params) == pytest.approx(1e-4, rel=1e-12)
    assert delocalization_exact(labeled) == pytest.approx(1e-4, rel=1e-3)


@pytest.mark.physics
def test_coupler_mediated_zz_matches_exact(synthetic_device):
    """Test the fourth-order term against exact diagonalization of a dispersive RWA dimer."""
    params = synthetic_device(
        omega_GHz=(5.0, 7.0, 5.6),
        anharmonicity_GHz=(-0.25, -0.1, -0.25),
        g12_MHz=0.0,
        g1c_MHz=50.0,
        g2c_MHz=50.0,
    )
    components = zz_perturbative(params)
    labeled = dressed_spectrum(params, TruncationPolicy(levels=4), rwa=True)

    assert components.zeta2 == 0.0
    assert components.zeta3 == 0.0
    assert components.zeta4 / GHZ == pytest.approx(-7.01e-6, rel=0.01)
    assert zz_exact(labeled) == pytest.approx(components.total, rel=0.1)


@pytest.mark.physics
@pytest.mark.parametrize("flux", [0.40, 0.43, 0.46])
def test_perturbative_zz_on_weakly_coupled_reference_device(reference_model, flux):
    """Test the closed-form zeta against the rotating-wave spectrum of the reference device at 20% coupling."""
    params = reference_model.params_at(TWO_PI * flux).scaled_couplings(0.2)
    labeled = dressed_spectrum(params, TruncationPolicy(levels=5), rwa=True)

    assert zz_perturbative(params).total == pytest.approx(zz_exact(labeled), rel=0.05)


@pytest.mark.physics
def test_counter_rotating_terms_shift_reference_zz(reference_model):
    """Test that the full coupling moves zeta away from the rotating-wave value the closed form describes."""
    params = reference_model.params_at(TWO_PI * 0.43).scaled_couplings(0.2)
    rwa = zz_exact(dressed_spectrum(params, TruncationPolicy(levels=5), rwa=True))
    full = zz_exact(dressed_spectrum(params, TruncationPolicy(levels=5)))

    assert np.sign(full) == np.sign(rwa)
    assert abs(full - rwa) > 0.02 * abs(rwa)


def test_geff_rwa_vanishes_on_cancellation(synthetic_device):
    """Test that g_12 chosen to cancel the mediated term gives a zero RWA coupling."""
    params = synthetic_device(g1c_MHz=100.0, g2c_MHz=-100.0)
    dets = DetuningSet.from_params(params)
    g1c, g2c = params.g("q1", "c"), params.g("q2", "c")
    g12 = -0.5 * g1c * g2c * (1.0 / dets.d1c + 1.0 / dets.d2c)
    coupling = g_eff_sw(params.with_coupling("q1", "q2", g12))

    assert coupling.rwa_value == pytest.approx(0.0, abs=1e-12)
    assert coupling.value != pytest.approx(0.0, abs=1e-6)


def test_geff_mediated_term_flips_with_g2c(synthetic_device):
    """Test that flipping the sign of g_2c flips the coupler-mediated term."""
    params = synthetic_device(g12_MHz=10.0, g1c_MHz=100.0, g2c_MHz=80.0)
    flipped = params.with_coupling("q2", "c", -params.g("q2", "c"))
    g12 = params.g("q1", "q2")

    assert g_eff_sw(params).value - g12 == pytest.approx(-(g_eff_sw(flipped).value - g12), rel=1e-12)


def test_geff_pole_at_resonance(synthetic_device):
    """Test that a coupler resonant with qubit 1 raises PoleError."""
    params = synthetic_device(omega_GHz=(6.0, 6.0, 5.5))

    with pytest.raises(PoleError) as excinfo:
        g_eff_sw(params)
    assert excinfo.value.resonance == "Delta_1c"


@pytest.mark.physics
def test_geff_zeros_branch_of_reference_device(reference_params):
    """Test that the reference coupling signs put the idle coupler below both qubits."""
    zeros = geff_zeros(reference_params)

    assert zeros.branch == "-"
    assert zeros.chosen == zeros.minus
    assert zeros.chosen < reference_params.frequency("q2")


def test_geff_zeros_branch_with_positive_product(synthetic_device):
    """Test that sgn(g_12 g_1c g_2c) = +1 puts the idle coupler above both qubits."""
    params = synthetic_device(g12_MHz=10.0, g1c_MHz=100.0, g2c_MHz=100.0)
    zeros = geff_zeros(params)

    assert zeros.branch == "+"
    assert zeros.chosen > params.frequency("q1")


@pytest.mark.parametrize("branch", ["plus", "minus"])
def test_epsilon_at_geff_zero(synthetic_device, branch):
    """Test the closed-form epsilon at both zeros against epsilon_perturbative there."""
    params = synthetic_device(g12_MHz=10.0, g1c_MHz=100.0, g2c_MHz=-90.0)
    zeros = geff_zeros(params)
    at_zero = params.with_mode("c", omega=getattr(zeros, branch))

    assert g_eff_sw(at_zero).rwa_value == pytest.approx(0.0, abs=1e-9)
    assert epsilon_perturbative(at_zero) == pytest.approx(getattr(zeros, f"epsilon_{branch}"), rel=1e-8)


def test_geff_zeros_need_direct_coupling(synthetic_device):
    """Test that g_12 = 0 raises DegenerateCouplingError."""
    with pytest.raises(DegenerateCouplingError):
        geff_zeros(synthetic_device(g12_MHz=0.0))


def test_zz_poles_are_named(synthetic_device):
    """Test that each perturbative resonance raises PoleError with its name."""
    straddle = synthetic_device(omega_GHz=(5.25, 4.8, 5.5), anharmonicity_GHz=(-0.25, 0.2, -0.25))
    with pytest.raises(PoleError) as excinfo:
        zz_perturbative(straddle)
    assert excinfo.value.resonance == "Delta_12 - U_2"

    two_photon = synthetic_device(omega_GHz=(6.0, 4.8, 5.5), anharmonicity_GHz=(-0.25, 1.9, -0.25))
    with pytest.raises(PoleError) as excinfo:
        zz_perturbative(two_photon)
    assert excinfo.value.resonance == "Delta_1c + Delta_2c - U_c"

    degenerate = synthetic_device(omega_GHz=(5.5, 4.8, 5.5))
    with pytest.raises(PoleError, match="Delta_12"):
        epsilon_perturbative(degenerate)


def test_sweet_spot_reduces_to_symmetric_form():
    """Test that delta = 0 gives the symmetric closed form."""
    U, d1c, d2c = -0.2 * GHZ, 1.5 * GHZ, 1.0 * GHZ
    d12 = d1c - d2c
    expected = -0.5 * U / (1.0 - U**2 / d12**2 - U / (2.0 * (d1c + d2c)))

    assert uc_sweet_spot(U, d1c, d2c) == pytest.approx(expected, rel=1e-14)
    assert uc_sweet_spot(U, d1c, d2c, delta=0.1) != pytest.approx(expected, rel=1e-3)


@pytest.mark.physics
def test_sweet_spot_positive_for_reference_detunings():
    """Test that the dispersive reference detunings need a positive coupler anharmonicity."""
    assert uc_sweet_spot(-0.2 * GHZ, 1.508 * GHZ, 1.008 * GHZ) > 0.0


@pytest.mark.physics
def test_sweet_spot_sign_law(rng):
    """Test sign(U_c) = -sign(U) when dispersive and sign(U_c) = sign(U) when straddling."""
    for _ in range(1000):
        U = -rng.uniform(0.15, 0.35) * GHZ
        d2c = rng.uniform(1.2, 2.0) * GHZ
        sign = rng.choice([-1.0, 1.0])

        dispersive = sign * rng.uniform(1.2, 3.0) * abs(U)
        assert np.sign(uc_sweet_spot(U, d2c + dispersive, d2c)) == -np.sign(U)

        straddling = sign * rng.uniform(0.1, 0.9) * abs(U)
        assert np.sign(uc_sweet_spot(U, d2c + straddling, d2c)) == np.sign(U)


def test_sweet_spot_divergence():
    """Test that a vanishing bracket raises DivergentSweetSpotError."""
    U = -0.2 * GHZ
    # bracket 1 - U^2/d12^2 - U/(2 S) = 0 solved for d12 at fixed d1c + d2c
    S = 2.0 * GHZ
    d12 = abs(U) / np.sqrt(1.0 - U / (2.0 * S))
    d1c = 0.5 * (S + d12)
    d2c = 0.5 * (S - d12)

    with pytest.raises(DivergentSweetSpotError):
        uc_sweet_spot(U, d1c, d2c)


def test_crosstalk_report_of_reference_device(reference_params):
    """Test that the report carries exact and perturbative values with physical ranges."""
    report = crosstalk_report(reference_params, TruncationPolicy(levels=4))
    row = report.as_row()

    assert 0.0 <= report.epsilon_exact <= 1.0
    assert report.zeta_perturbative is not None
    assert report.g_eff is not None
    assert row["omega_c_GHz"] == pytest.approx(reference_params.frequency("c") / TWO_PI)
    assert row["phi_ext"] == pytest.approx(np.pi)


def test_crosstalk_report_flags_poles(synthetic_device):
    """Test that a pole in the closed forms becomes a flag, not an error."""
    # two-photon coupler line 0.5 MHz from |101>, decoupled so labeling stays clean
    params = synthetic_device(
        anharmonicity_GHz=(-0.25, 1.9005, -0.25), g12_MHz=2.0, g1c_MHz=0.0, g2c_MHz=0.0
    )
    report = crosstalk_report(params, TruncationPolicy(levels=3))

    assert report.flags == ["pole: Delta_1c + Delta_2c - U_c"]
    assert np.isnan(report.as_row()["zeta_pert_kHz"])


def test_crosstalk_sweep_keeps_order(reference_model):
    """Test that a sweep returns one report per flux in input order."""
    grid = np.array([0.45, 0.4, 0.5]) * TWO_PI
    reports = crosstalk_sweep(reference_model, grid, TruncationPolicy(levels=4))

    assert [r.phi_ext for r in reports] == pytest.approx(list(grid))
    assert all(np.isfinite(r.zeta_exact) for r in reports)
    assert reports[0].omega_c > reports[2].omega_c


def test_convergence_sweep_rows(reference_params):
    """Test that the convergence sweep reports one row per truncation."""
    report = convergence_sweep(reference_params, levels=(3, 4))
    rows = report.rows()

    assert [row["levels"] for row in rows] == [3, 4]
    assert report.zeta_spread >= 0.0
    assert set(rows[0]) == {"levels", "zeta_kHz", "epsilon"}
