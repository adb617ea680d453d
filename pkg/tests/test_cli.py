"""
Tests for the command-line interface: exit codes, output files and the
run manifest.
"""

import numpy as np
import pytest
import yaml

from decoupler import __version__
from decoupler.artifacts import read_csv, read_metadata
from decoupler.cli import main
from decoupler.constants import ghz_to_angular
from decoupler.errors import IntegrationError, OutOfRegimeError
from decoupler.gates import CZ, GateReport

pytestmark = pytest.mark.cli


@pytest.fixture
def run(reference_config, config_file, tmp_path):
    """
    Run the CLI on a config mapping.

    Usage:
        code, out_dir = run("device-params", "--flux", "0.5")
    """

    def _run(*command, config=None, options=(), out="out"):
        path = config_file(config if config is not None else reference_config)
        out_dir = tmp_path / out
        argv = ["--config", str(path), "--out-dir", str(out_dir), *options, *command]
        return main(argv), out_dir

    return _run


def test_version_flag(capsys):
    """Test that --version prints the package version."""
    with pytest.raises(SystemExit) as excinfo:
        main(["--version"])

    assert excinfo.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_subcommand_required(capsys):
    """Test that a missing subcommand is a usage error."""
    with pytest.raises(SystemExit) as excinfo:
        main([])
    assert excinfo.value.code != 0


def test_invalid_config_exits_with_config_code(run, reference_config, capsys):
    """Test that a config error returns 2 before anything is written."""
    del reference_config["coupler"]["alpha"]

    code, out_dir = run("device-params", config=reference_config)

    assert code == 2
    assert not out_dir.exists()
    assert "error[config]" in capsys.readouterr().err


def test_invalid_truncation_exits_with_config_code(run):
    """Test that a malformed --truncation returns 2."""
    code, out_dir = run("spectrum", options=["--truncation", "three"])

    assert code == 2
    assert not out_dir.exists()


def test_preflight_failure_exits_with_config_code(run, reference_config):
    """Test that a multi-well coupler fails preflight."""
    reference_config["coupler"]["alpha"] = 0.6

    code, _ = run("device-params", config=reference_config)
    assert code == 2


def test_strict_mode_fails_on_warnings(run, reference_config):
    """Test that --strict turns the capacitance hierarchy warning into a failure."""
    reference_config["circuit"]["C1c_fF"] = 20.0
    reference_config["circuit"]["C2c_fF"] = 20.0

    strict, _ = run("device-params", config=reference_config, options=["--strict"], out="strict")
    lenient, _ = run("device-params", config=reference_config, out="lenient")

    assert strict == 2
    assert lenient == 0


def test_device_params_outputs(run, capsys):
    """Test the device-params CSV, its metadata and the manifest."""
    code, out_dir = run("device-params")

    assert code == 0
    frame = read_csv(out_dir / "device_params.csv")
    q1 = frame[frame["quantity"] == "mode q1"].iloc[0]
    assert q1["omega_GHz"] == pytest.approx(6.6)
    assert "g q1-c" in set(frame["quantity"])

    meta = read_metadata(out_dir / "device_params.csv")
    assert meta["command"] == "device-params"
    assert meta["phi_ext_over_Phi0"] == "0.5"

    manifest = yaml.safe_load((out_dir / "manifest.yaml").read_text())
    assert manifest["status"] == "ok"
    assert "device_params.csv" in manifest["files"]
    assert len(manifest["run_id"]) == 12
    assert manifest["config"]["coupler"]["alpha"] == 0.2347
    assert "mode q1" in capsys.readouterr().out


def test_outputs_are_reproducible(run):
    """Test that identical inputs give byte-identical CSV files."""
    _, first = run("device-params", out="first")
    _, second = run("device-params", out="second")

    assert (first / "device_params.csv").read_bytes() == (second / "device_params.csv").read_bytes()


def test_overrides_reach_the_model(run):
    """Test that --set changes the derived parameters."""
    code, out_dir = run("device-params", options=["--set", "qubits.q1.frequency_GHz=6.4"])

    assert code == 0
    frame = read_csv(out_dir / "device_params.csv")
    assert frame[frame["quantity"] == "mode q1"].iloc[0]["omega_GHz"] == pytest.approx(6.4)
    manifest = yaml.safe_load((out_dir / "manifest.yaml").read_text())
    assert manifest["settings"]["overrides"] == ["qubits.q1.frequency_GHz=6.4"]


def test_spectrum_lists_levels(run):
    """Test the spectrum level table and the eigenvector dump."""
    code, out_dir = run("spectrum", "--count", "5", "--dump", options=["--truncation", "3"])

    assert code == 0
    frame = read_csv(out_dir / "spectrum.csv")
    assert len(frame) == 5
    assert frame["energy_GHz"].iloc[0] == 0.0
    assert read_metadata(out_dir / "spectrum.csv")["levels"] == "3"
    assert (out_dir / "eigenvectors.txt").read_text().startswith("# 000 0 ")


def test_crosstalk_single_flux(run, capsys):
    """Test the single-flux crosstalk report and the printed g_eff zeros."""
    code, out_dir = run("crosstalk", "--flux", "0.5")

    assert code == 0
    frame = read_csv(out_dir / "crosstalk.csv")
    assert len(frame) == 1
    assert np.isfinite(frame["zeta_exact_kHz"].iloc[0])
    assert "g_eff zeros" in capsys.readouterr().out


def test_regime_error_exit_code(run, mocker):
    """Test that a regime error returns 3 and marks the manifest as failed."""
    mocker.patch.dict(
        "decoupler.cli.COMMANDS",
        {"device-params": mocker.Mock(side_effect=OutOfRegimeError("coupler left the single-well window"))},
    )

    code, out_dir = run("device-params")

    assert code == 3
    manifest = yaml.safe_load((out_dir / "manifest.yaml").read_text())
    assert manifest["status"] == "failed: regime"


def test_numerical_error_exit_code(run, mocker, capsys):
    """Test that a numerical error returns 4 with a JSON error record."""
    mocker.patch.dict(
        "decoupler.cli.COMMANDS", {"spectrum": mocker.Mock(side_effect=IntegrationError("not converged"))}
    )

    code, _ = run("spectrum", options=["--json-logs"])

    assert code == 4
    assert '"error": "numerical"' in capsys.readouterr().err


def test_gate_report_written(run, mocker):
    """Test that the gate subcommand writes the report of the simulated gate."""
    report = GateReport(
        scheme="cz40",
        parameters={"tau": 5.0, "omega_int": ghz_to_angular(5.8)},
        raw=np.array(CZ),
        compensated=np.array(CZ),
        infidelity=1e-5,
        leakage=1e-6,
        unitarity_defect=1e-13,
        decoherence=8e-4,
        t_gate=40.0,
        dt=1e-3,
        objective=1.1e-5,
    )
    simulate = mocker.patch("decoupler.cli.simulate_gate", return_value=report)

    code, out_dir = run("gate", "--idle-flux", "0.48")

    assert code == 0
    assert simulate.call_args.args[1] == pytest.approx(0.96 * np.pi)
    assert simulate.call_args.kwargs["optimize"] is False
    text = (out_dir / "gate_report.txt").read_text()
    assert text.startswith("idle_flux_over_Phi0: 0.48")
    assert "scheme: cz40" in text
