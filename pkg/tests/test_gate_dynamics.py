"""
Tests for flux pulses, propagation, gate metrics and the CZ gate schemes.
"""

import numpy as np
import pytest
from scipy import linalg

from decoupler.constants import TWO_PI, ghz_to_angular
from decoupler.crosstalk import PairLabels, dressed_spectrum, zz_exact
from decoupler.errors import CompensationError, IntegrationError, InvalidSpecError, UnreachableFrequencyError
from decoupler.fock import FockOperators, HamiltonianAssembler, TruncationPolicy
from decoupler.gates import (
    CZ,
    CouplerBranch,
    GateReport,
    GateSettings,
    GateSimulator,
    ParameterSchedule,
    PulseSpec,
    check_step_convergence,
    compensate,
    computational_unitary,
    decoherence_estimate,
    flattop,
    flux_schedule,
    leakage,
    optimize_pulse,
    process_infidelity,
    propagate,
    simulate_gate,
    unitarity_defect,
)
from decoupler.idle import find_idle_flux

pytestmark = pytest.mark.gate

LEVELS = (3, 3, 3)


@pytest.fixture
def assembler():
    return HamiltonianAssembler(FockOperators(LEVELS))


@pytest.fixture
def branch(reference_model, reference_spec):
    """Coupler spectrum on [0, pi], where omega_c falls monotonically."""
    return CouplerBranch(reference_model.coupler_spec, (0.0, np.pi), reference_spec.coupler_model)


# ===== PULSES =====


def test_pulse_spec_validation():
    """Test that non-positive gate or rise times are rejected."""
    with pytest.raises(InvalidSpecError, match="Gate time"):
        PulseSpec(1.0, 2.0, tau=1.0, t_gate=0.0).validate()
    with pytest.raises(InvalidSpecError, match="Rise/fall"):
        PulseSpec(1.0, 2.0, tau=-1.0, t_gate=10.0).validate()
    assert PulseSpec(1.0, 2.5, tau=1.0, t_gate=10.0).amplitude == pytest.approx(1.5)


def test_flattop_shape():
    """Test the symmetry, plateau and monotone rise of the erf flattop."""
    pulse = PulseSpec(omega_idle=30.0, omega_int=35.0, tau=2.0, t_gate=20.0)
    t = np.linspace(0.0, 20.0, 201)
    omega = flattop(pulse, t)

    assert np.allclose(omega, omega[::-1], rtol=0, atol=1e-12)
    assert flattop(pulse, 10.0) == pytest.approx(35.0, rel=1e-6)
    assert np.all(np.diff(omega[:101]) >= 0)
    assert 30.0 < omega[0] < 31.0


def test_branch_inversion_round_trip(branch):
    """Test that inverted fluxes reproduce the requested coupler frequencies."""
    for omega_GHz in (5.2, 5.5, 5.9):
        target = ghz_to_angular(omega_GHz)
        phi = branch.invert(target)
        assert 0.0 <= phi <= np.pi
        assert branch.frequency(phi) == pytest.approx(target, rel=1e-10)


def test_branch_rejects_unreachable_target(branch):
    """Test that a frequency below the coupler minimum raises UnreachableFrequencyError."""
    low, high = branch.omega_range

    assert low / TWO_PI == pytest.approx(5.070, abs=0.005)
    with pytest.raises(UnreachableFrequencyError):
        branch.invert(low - ghz_to_angular(0.05))


def test_flux_schedule_follows_pulse(branch):
    """Test that raising omega_c lowers the flux on this branch and the round trip is tight."""
    pulse = PulseSpec(ghz_to_angular(5.2), ghz_to_angular(5.6), tau=2.0, t_gate=20.0)
    schedule = flux_schedule(pulse, branch, np.linspace(0.0, 20.0, 41), check_residual=1e-9)

    assert schedule.residual <= 1e-9
    assert schedule.phi_ext[20] < schedule.phi_ext[0]
    assert np.allclose(schedule.omega, flattop(pulse, schedule.times))


def test_flux_schedule_outside_branch(branch):
    """Test that a pulse leaving the branch raises UnreachableFrequencyError."""
    pulse = PulseSpec(ghz_to_angular(5.2), ghz_to_angular(4.5), tau=2.0, t_gate=20.0)

    with pytest.raises(UnreachableFrequencyError):
        flux_schedule(pulse, branch, np.linspace(0.0, 20.0, 21))


# ===== PROPAGATION =====


def test_constant_hamiltonian_propagator(assembler, synthetic_device):
    """Test that propagation of a constant Hamiltonian equals exp(-iHt)."""
    coefficients = assembler.coefficients(synthetic_device())
    schedule = ParameterSchedule.constant(coefficients, assembler, t_gate=5.0)

    result = propagate(schedule, dt=0.05)
    expected = linalg.expm(-1j * assembler.dense_from_coefficients(coefficients) * 5.0)

    assert result.steps == 100
    assert np.allclose(result.unitary, expected, atol=1e-9)
    assert result.defect < 1e-10


def test_propagator_composes_over_intervals(assembler, synthetic_device):
    """Test U(0, T) = U(t1, T) U(0, t1) for a time-dependent schedule."""
    c0 = assembler.coefficients(synthetic_device())
    c1 = assembler.coefficients(synthetic_device(omega_GHz=(6.0, 5.2, 5.5)))
    schedule = ParameterSchedule(np.array([0.0, 5.0, 10.0]), np.stack([c0, c1, c0]), assembler)

    full = propagate(schedule, dt=0.01)
    first = propagate(schedule, dt=0.01, t_stop=4.0)
    second = propagate(schedule, dt=0.01, t_start=4.0)

    assert full.steps == first.steps + second.steps
    assert np.allclose(second.unitary @ first.unitary, full.unitary, atol=1e-8)
    assert unitarity_defect(full.unitary) < 1e-8


def test_propagation_snapshots(assembler, synthetic_device):
    """Test that snapshots are taken on schedule and end at the final propagator."""
    schedule = ParameterSchedule.constant(assembler.coefficients(synthetic_device()), assembler, t_gate=2.0)
    psi0 = np.zeros(assembler.dim)
    psi0[0] = 1.0

    result = propagate(schedule, dt=0.02, snapshot_every=25, project=lambda U: U @ psi0)

    assert result.snapshot_times == pytest.approx([0.5, 1.0, 1.5, 2.0])
    assert np.allclose(result.snapshots[-1], result.unitary @ psi0)


def test_non_positive_step_rejected(assembler, synthetic_device):
    """Test that dt <= 0 raises IntegrationError."""
    schedule = ParameterSchedule.constant(assembler.coefficients(synthetic_device()), assembler, t_gate=1.0)

    with pytest.raises(IntegrationError):
        propagate(schedule, dt=0.0)


def test_step_convergence_check():
    """Test the dt versus dt/2 comparison."""
    assert check_step_convergence(lambda h: h**2, 1e-3) == pytest.approx(7.5e-7)
    with pytest.raises(IntegrationError, match="halving"):
        check_step_convergence(lambda h: h**2, 0.1)


# ===== METRICS =====


def test_compensation_recovers_cz():
    """Test that global and single-qubit Z phases are removed from a phased CZ."""
    a, b, c = 0.3, -1.1, 2.0
    U4 = np.diag(np.exp(1j * np.array([a, b, c, b + c - a + np.pi])))

    result = compensate(U4)

    assert np.allclose(result.compensated, CZ, atol=1e-12)
    assert process_infidelity(result.compensated) == pytest.approx(0.0, abs=1e-12)
    assert result.phases == pytest.approx((c - a, b - a))


def test_identity_is_half_infidelity_to_cz():
    """Test the process infidelity of the identity with respect to CZ."""
    assert process_infidelity(np.eye(4, dtype=complex)) == pytest.approx(0.5)
    assert process_infidelity(np.eye(4, dtype=complex), target=np.eye(4)) == pytest.approx(0.0)


def test_compensation_refuses_gross_leakage():
    """Test that a small diagonal element raises CompensationError."""
    with pytest.raises(CompensationError):
        compensate(np.diag([1.0, 1.0, 1.0, 0.3]).astype(complex))


def test_uncoupled_evolution_is_identity_gate(assembler, synthetic_device):
    """Test that free evolution of uncoupled qubits compensates to the identity without leakage."""
    params = synthetic_device(g1c_MHz=0.0, g2c_MHz=0.0)
    labeled = dressed_spectrum(params, TruncationPolicy(levels=3), assembler=assembler)
    schedule = ParameterSchedule.constant(assembler.coefficients(params), assembler, t_gate=7.0)
    U = propagate(schedule, dt=0.05).unitary

    pair = PairLabels.default(params.mode_names)
    projected = computational_unitary(U, labeled, pair)

    assert np.allclose(projected.compensated, np.eye(4), atol=1e-9)
    assert leakage(U, labeled, pair) == pytest.approx(0.0, abs=1e-12)


def test_decoherence_estimate():
    """Test 1 - exp(-t/tau) for a 40 ns gate and 50 us coherence."""
    assert decoherence_estimate(40.0, 50.0) == pytest.approx(8.0e-4, abs=1e-5)
    with pytest.raises(ValueError):
        decoherence_estimate(40.0, 0.0)


# ===== SCHEMES =====


def test_settings_for_scheme():
    """Test scheme defaults and overrides."""
    cz40 = GateSettings.for_scheme("cz40")
    fast = GateSettings.for_scheme("cz-fast", tau=1.5, dt=None)

    assert cz40.t_gate == 40.0
    assert cz40.parameter_names == ("tau", "omega_int")
    assert fast.t_gate == 20.0
    assert fast.tau == 1.5
    assert fast.dt == 1e-3
    assert fast.parameter_names == ("tau", "omega_int", "omega_q1_int")


def test_unknown_scheme_rejected():
    """Test that an unknown scheme raises InvalidSpecError."""
    with pytest.raises(InvalidSpecError, match="Unknown gate scheme"):
        GateSettings.for_scheme("iswap")
    with pytest.raises(InvalidSpecError, match="positive"):
        GateSettings(dt=-1.0).validate()


def test_gate_report_output_units():
    """Test that report parameters are printed in ns and GHz."""
    report = GateReport(
        scheme="cz40",
        parameters={"tau": 5.0, "omega_int": ghz_to_angular(5.8)},
        raw=np.array(CZ),
        compensated=np.array(CZ),
        infidelity=1e-5,
        leakage=2e-6,
        unitarity_defect=1e-13,
        decoherence=8e-4,
        t_gate=40.0,
        dt=1e-3,
        objective=1.2e-5,
    )

    assert report.parameters_out() == {"tau_ns": 5.0, "omega_int_GHz": pytest.approx(5.8)}
    assert report.summary()["scheme"] == "cz40"
    text = report.as_text()
    assert "infidelity: 1e-05" in text
    assert "omega_int_GHz: 5.8" in text
    assert text.count("-1.000000+0.000000j") == 2


def test_optimize_pulse_finds_bowl_minimum(mocker):
    """Test the bounded simplex search at the coarse step and the fine-step verification."""
    settings = GateSettings.for_scheme("cz40", tau_bounds=(2.0, 8.0), omega_int_bounds=(1.0, 5.0))
    simulator = mocker.Mock()
    simulator.settings = settings
    simulator.bounds.return_value = [(2.0, 8.0), (1.0, 5.0)]
    simulator.objective.side_effect = lambda x, dt: (x["tau"] - 5.0) ** 2 + (x["omega_int"] - 3.0) ** 2
    simulator.verified.side_effect = lambda x: GateReport(
        scheme="cz40",
        parameters=x,
        raw=np.array(CZ),
        compensated=np.array(CZ),
        infidelity=0.0,
        leakage=0.0,
        unitarity_defect=0.0,
        decoherence=0.0,
        t_gate=40.0,
        dt=settings.dt,
        objective=0.0,
    )

    report = optimize_pulse(simulator, seed={"tau": 4.0, "omega_int": 2.5}, max_evaluations=400)

    assert report.parameters["tau"] == pytest.approx(5.0, abs=1e-3)
    assert report.parameters["omega_int"] == pytest.approx(3.0, abs=1e-3)
    assert report.converged
    assert report.evaluations == len(report.trace) == simulator.objective.call_count
    assert all(call.kwargs["dt"] == settings.optimize_dt for call in simulator.objective.call_args_list)
    simulator.verified.assert_called_once()


def _bowl_simulator(mocker, settings, bounds, objective):
    simulator = mocker.Mock()
    simulator.settings = settings
    simulator.bounds.return_value = bounds
    simulator.objective.side_effect = objective
    simulator.verified.side_effect = lambda x: GateReport(
        scheme=settings.scheme,
        parameters=x,
        raw=np.array(CZ),
        compensated=np.array(CZ),
        infidelity=0.0,
        leakage=0.0,
        unitarity_defect=0.0,
        decoherence=0.0,
        t_gate=settings.t_gate,
        dt=settings.dt,
        objective=0.0,
    )
    return simulator


def test_optimize_pulse_enforces_budget(mocker):
    """Test that the evaluation budget caps every objective call."""
    settings = GateSettings.for_scheme("cz40", tau_bounds=(2.0, 8.0), omega_int_bounds=(1.0, 5.0))
    simulator = _bowl_simulator(
        mocker, settings, [(2.0, 8.0), (1.0, 5.0)], lambda x, dt: 1.0 + (x["tau"] - 5.0) ** 2 + x["omega_int"]
    )

    report = optimize_pulse(simulator, seed={"tau": 4.0, "omega_int": 2.5}, max_evaluations=12)

    assert simulator.objective.call_count == 12
    assert report.evaluations == 12
    assert not report.converged


def test_optimize_pulse_leaves_a_bound_seed(mocker):
    """Test that a seed on the amplitude bound still reaches an interior minimum."""
    settings = GateSettings.for_scheme("cz40", tau_bounds=(2.0, 8.0), omega_int_bounds=(1.0, 5.0))
    simulator = _bowl_simulator(
        mocker,
        settings,
        [(2.0, 8.0), (1.0, 5.0)],
        lambda x, dt: 0.1 * (x["tau"] - 3.0) ** 2 + (x["omega_int"] - 4.2) ** 2,
    )

    report = optimize_pulse(simulator, seed={"tau": 6.0, "omega_int": 5.0}, max_evaluations=400)

    assert report.parameters["omega_int"] == pytest.approx(4.2, abs=1e-2)
    assert report.parameters["tau"] == pytest.approx(3.0, abs=5e-2)
    assert report.evaluations <= 400


def test_simulator_idle_basis(reference_model):
    """Test that the simulator labels the computational states at the idle flux."""
    settings = GateSettings.for_scheme("cz40")
    simulator = GateSimulator(reference_model, np.pi, settings, trunc=TruncationPolicy(levels=3, cutoff=3))

    assert simulator.omega_idle / TWO_PI == pytest.approx(5.070, abs=0.005)
    assert simulator.assembler.dim == 17
    assert simulator.labeled.min_weight > 0.5
    assert len(simulator.sample_times()) == 161


@pytest.mark.slow
@pytest.mark.physics
def test_cz40_seed_gives_conditional_phase(reference_model):
    """Test that the adiabatic cz40 seed already produces an approximate CZ."""
    settings = GateSettings.for_scheme("cz40", dt=1e-2, check_convergence=False)
    report = simulate_gate(reference_model, np.pi, settings, trunc=TruncationPolicy(levels=3, cutoff=3))

    assert report.unitarity_defect < 1e-8
    assert report.leakage < 0.05
    assert report.infidelity < 0.1
    assert report.decoherence == pytest.approx(decoherence_estimate(40.0, 50.0))
    assert len(report.trace) == 1


@pytest.mark.physics
def test_zeta_table_follows_labels_to_the_bound(reference_model):
    """Test that the seed's zeta table reaches the amplitude bound past the ambiguous labels."""
    settings = GateSettings.for_scheme("cz40")
    simulator = GateSimulator(reference_model, np.pi, settings, trunc=TruncationPolicy(levels=3, cutoff=3))

    grid, zeta = simulator.zeta_table(points=25)

    assert grid[0] == pytest.approx(simulator.omega_idle)
    assert grid[-1] == pytest.approx(settings.omega_int_bounds[1])
    assert np.all(np.isfinite(zeta))
    assert zeta[0] == pytest.approx(zz_exact(simulator.labeled, simulator.pair), abs=1e-12)
    assert abs(zeta[-1]) > 10 * abs(zeta[0])


def test_cz40_seed_scores_rise_time_candidates(reference_model, mocker):
    """Test that the seed picks the rise time whose gate objective is lowest."""
    settings = GateSettings.for_scheme("cz40", omega_int=ghz_to_angular(5.9))
    simulator = GateSimulator(reference_model, np.pi, settings, trunc=TruncationPolicy(levels=3, cutoff=3))
    mocker.patch.object(simulator, "objective", side_effect=lambda x, dt: abs(x["tau"] - 2.5))

    seed = simulator.seed_cz40()
    taus = [call.args[0]["tau"] for call in simulator.objective.call_args_list]

    assert len(taus) == 6
    assert seed["tau"] == min(taus, key=lambda t: abs(t - 2.5))
    assert seed["omega_int"] == settings.omega_int


@pytest.mark.slow
@pytest.mark.physics
def test_cz40_optimized_gate_meets_target(reference_model):
    """Test the optimized 40 ns CZ at the reference idle point."""
    idle = find_idle_flux(reference_model, trunc=TruncationPolicy(levels=6))
    report = simulate_gate(reference_model, idle.phi_ext, GateSettings.for_scheme("cz40"), optimize=True)

    assert report.infidelity <= 5e-4
    assert report.leakage <= 1e-3
    assert report.evaluations <= 300
    assert report.dt == 1e-3


@pytest.mark.slow
@pytest.mark.physics
def test_fast_gate_meets_target(reference_model):
    """Test the optimized 20 ns |101>-|200> CZ at the reference idle point."""
    idle = find_idle_flux(reference_model, trunc=TruncationPolicy(levels=6))
    report = simulate_gate(reference_model, idle.phi_ext, GateSettings.for_scheme("cz-fast"), optimize=True)

    assert report.t_gate == 20.0
    assert report.infidelity <= 1e-4
    assert report.evaluations <= 300
