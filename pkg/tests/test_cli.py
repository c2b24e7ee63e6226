"""Integration tests for CLI behavior and output file stability."""
import json
import math
from unittest.mock import patch

import numpy as np
import pytest
import scipy.sparse as sp

from gsqc import __version__
from gsqc.__main__ import EXIT_FINDINGS, EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK, main
from gsqc.circuit.library import random_circuit
from gsqc.circuit.parser import render_circuit
from gsqc.compiler.hamiltonian import OperatorMatrix
from gsqc.config import CONFIG_ENV
from gsqc.export import read_operator, write_operator

from conftest import FIXTURES


def _run_main(*args: str) -> int:
    with patch("sys.argv", ["gsqc", *args]):
        return main()


@pytest.fixture(autouse=True)
def _isolated_cwd(tmp_path, monkeypatch):
    """Keep a stray ./gsqc.yaml or $GSQC_CONFIG out of the runs."""
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv(CONFIG_ENV, raising=False)


# --- build ---

def test_build_bell(tmp_path, capsys):
    code = _run_main("build", "--circuit", str(FIXTURES / "bell.circ"), "--lambda", "0.5", "--out", str(tmp_path))
    assert code == EXIT_OK
    assert "D=36" in capsys.readouterr().out
    op, header = read_operator(tmp_path / "operator.mtx")
    assert op.dimension == 36
    assert op.lam == 0.5
    assert header["num_qubits"] == 2
    assert (tmp_path / "ground_state.bin").exists()
    assert (tmp_path / "ground_state.json").exists()


def test_build_json_output(tmp_path, capsys):
    code = _run_main("--json", "build", "--example", "identity", "--steps", "4", "--out", str(tmp_path))
    assert code == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data["summary"]["dimension"] == 10
    assert data["summary"]["lambda"] == 1.0
    assert data["meta"]["command"] == "build"
    assert data["meta"]["schema_version"] == "0.1"


def test_missing_circuit_file(tmp_path, capsys):
    code = _run_main("build", "--circuit", str(tmp_path / "nope.circ"))
    assert code == EXIT_INPUT
    assert "circuit file not found" in capsys.readouterr().err


def test_no_circuit_given(capsys):
    assert _run_main("build") == EXIT_INPUT
    assert "--circuit PATH or --example NAME" in capsys.readouterr().err


def test_unknown_example(capsys):
    assert _run_main("build", "--example", "shor") == EXIT_INPUT
    assert "unknown example 'shor'" in capsys.readouterr().err


def test_lambda_out_of_range(capsys):
    code = _run_main("build", "--circuit", str(FIXTURES / "bell.circ"), "--lambda", "1.5")
    assert code == EXIT_INPUT
    assert "lambda must lie in [0, 1]" in capsys.readouterr().err


def test_syntax_error_reports_position(capsys):
    code = _run_main("build", "--circuit", str(FIXTURES / "bad_syntax.circ"))
    assert code == EXIT_INPUT
    assert "line 3, column 6" in capsys.readouterr().err


def test_non_unitary_gate_rejected(capsys):
    code = _run_main("build", "--circuit", str(FIXTURES / "non_unitary.circ"))
    assert code == EXIT_INPUT
    assert "invalid circuit" in capsys.readouterr().err


# --- gap-scan ---

def test_gap_scan_identity_chain(tmp_path, capsys):
    code = _run_main("--json", "gap-scan", "--example", "identity", "--steps", "7",
                     "--grid", "0:1:101", "--out", str(tmp_path))
    assert code == EXIT_OK
    summary = json.loads(capsys.readouterr().out)["summary"]
    assert summary["lambda_star"] == pytest.approx(math.cos(math.pi / 8), abs=1e-4)
    assert summary["refined"] is True
    lines = (tmp_path / "gap_profile.csv").read_text().splitlines()
    assert lines[0] == "s,lambda,E0,E1,gap,method,refined"
    assert len(lines) >= 102


def test_gap_scan_reports_bound_for_cnot_circuits(tmp_path, capsys):
    code = _run_main("gap-scan", "--circuit", str(FIXTURES / "bell.circ"), "--grid", "0:1:21",
                     "--out", str(tmp_path))
    assert code == EXIT_OK
    assert "bound:" in capsys.readouterr().out
    meta = json.loads((tmp_path / "gap_profile.json").read_text())["meta"]
    assert meta["z_bound"]["lower_bound"] <= meta["z_bound"]["upper_estimate"]


def test_gap_scan_keeps_profile_when_bound_does_not_apply(tmp_path, capsys):
    circuit = tmp_path / "cnot_only.circ"
    circuit.write_text("qubits 2\nstep CNOT 0 1\n")
    code = _run_main("gap-scan", "--circuit", str(circuit), "--grid", "0:1:11", "--out", str(tmp_path))
    assert code == EXIT_OK
    captured = capsys.readouterr()
    assert "min gap" in captured.out
    assert "bound:" not in captured.out
    assert "warning: gap bound skipped" in captured.err
    meta = json.loads((tmp_path / "gap_profile.json").read_text())["meta"]
    assert meta["z_bound"] is None
    assert meta["z_bound_skipped"]
    assert (tmp_path / "gap_profile.csv").exists()


@pytest.mark.parametrize("args, message", [
    (("gap-scan", "--example", "identity", "--grid", "0:1:2"), "needs at least 3 points"),
    (("evolve", "--example", "identity", "--schedule", "gap-adapted", "--grid", "0:1:1", "--no-refine"),
     "needs at least 2 points"),
    (("example", "bell-disentangle", "--steps", "3"), "bell-disentangle needs at least 4"),
    (("gap-scan", "--family", "bell-disentangle", "--n-range", "2:5"), "bell-disentangle needs N >= 4"),
    (("evolve", "--family", "bell-disentangle", "--n-range", "3,5"), "bell-disentangle needs N >= 4"),
])
def test_malformed_requests_are_input_errors(args, message, capsys):
    assert _run_main(*args) == EXIT_INPUT
    err = capsys.readouterr().err
    assert message in err
    assert "Traceback" not in err


def test_two_point_grid_without_refinement(tmp_path):
    code = _run_main("gap-scan", "--example", "identity", "--grid", "0:1:2", "--no-refine", "--out", str(tmp_path))
    assert code == EXIT_OK
    assert len((tmp_path / "gap_profile.csv").read_text().splitlines()) == 3


def test_empty_grid(capsys):
    code = _run_main("gap-scan", "--example", "identity", "--grid", "0:1:0")
    assert code == EXIT_INPUT
    assert "grid is empty" in capsys.readouterr().err


def test_gap_scan_family_sweep(tmp_path, capsys):
    code = _run_main("gap-scan", "--family", "identity", "--n-range", "3:5", "--grid", "0:1:21",
                     "--out", str(tmp_path))
    assert code == EXIT_OK
    assert "fit: slope=" in capsys.readouterr().out
    lines = (tmp_path / "gap_family.csv").read_text().splitlines()
    assert lines[0] == "N,inv_N2,min_gap,lambda_star"
    assert [line.split(",")[0] for line in lines[1:]] == ["3", "4", "5"]


def test_family_needs_n_range(capsys):
    assert _run_main("gap-scan", "--family", "identity") == EXIT_INPUT
    assert "--family needs --n-range" in capsys.readouterr().err


def test_gap_scan_csv_is_byte_identical(tmp_path):
    for name in ("a", "b"):
        args = ("gap-scan", "--example", "bell-disentangle", "--steps", "4", "--grid", "0:1:21")
        assert _run_main(*args, "--out", str(tmp_path / name)) == EXIT_OK
    first = (tmp_path / "a" / "gap_profile.csv").read_bytes()
    second = (tmp_path / "b" / "gap_profile.csv").read_bytes()
    assert first == second


def test_config_file_supplies_defaults(tmp_path):
    code = _run_main("--config", str(FIXTURES / "run.yaml"), "gap-scan", "--example", "identity",
                     "--steps", "3", "--out", str(tmp_path))
    assert code == EXIT_OK
    lines = (tmp_path / "gap_profile.csv").read_text().splitlines()
    assert len(lines) == 12


def test_cli_flag_overrides_config_file(tmp_path):
    code = _run_main("--config", str(FIXTURES / "run.yaml"), "gap-scan", "--example", "identity",
                     "--steps", "3", "--grid", "0:1:5", "--out", str(tmp_path))
    assert code == EXIT_OK
    assert len((tmp_path / "gap_profile.csv").read_text().splitlines()) == 6


def test_missing_config_file(tmp_path, capsys):
    code = _run_main("--config", str(tmp_path / "nope.yaml"), "example")
    assert code == EXIT_INPUT
    assert "config file not found" in capsys.readouterr().err


# --- evolve ---

def test_evolve_dt_too_large(capsys):
    code = _run_main("evolve", "--example", "deutsch-jozsa", "--T", "10", "--dt", "10")
    assert code == EXIT_NUMERICAL
    assert "suggested: --dt" in capsys.readouterr().err


def test_evolve_short_run_succeeds(tmp_path, capsys):
    code = _run_main("evolve", "--example", "deutsch-jozsa", "--T", "0.01", "--out", str(tmp_path))
    assert code == EXIT_OK
    assert "final fidelity" in capsys.readouterr().out
    lines = (tmp_path / "trace.csv").read_text().splitlines()
    assert lines[0] == "t,s,lambda,fidelity,energy,norm"
    assert len(lines) == 202


def test_evolve_gap_adapted_json(tmp_path, capsys):
    code = _run_main("--json", "evolve", "--example", "deutsch-jozsa", "--schedule", "gap-adapted",
                     "--T", "270", "--out", str(tmp_path))
    assert code == EXIT_OK
    summary = json.loads(capsys.readouterr().out)["summary"]
    assert summary["schedule"] == "gap-adapted"
    assert summary["final_fidelity"] >= 0.9


def test_evolve_unknown_schedule(capsys):
    code = _run_main("evolve", "--example", "deutsch-jozsa", "--schedule", "cubic")
    assert code == EXIT_INPUT
    assert "schedule must be one of" in capsys.readouterr().err


# --- verify ---

def test_verify_bell_passes(tmp_path, capsys):
    code = _run_main("verify", "--circuit", str(FIXTURES / "bell.circ"), "--out", str(tmp_path))
    assert code == EXIT_OK
    assert "Verification passed" in capsys.readouterr().out
    report = json.loads((tmp_path / "verify.json").read_text())
    assert report["passed"] is True
    assert report["checks"] == {"residual": True, "readout": True, "gap": True}
    assert {f["key"] for f in report["facts"]} >= {"ground_state.residual", "readout.infidelity", "gap.min"}


def test_verify_random_circuit_without_cnots(tmp_path):
    path = tmp_path / "random.circ"
    path.write_text(render_circuit(random_circuit(3, 4, seed=7, cnot_probability=0.0)))
    code = _run_main("verify", "--circuit", str(path), "--out", str(tmp_path))
    assert code == EXIT_OK


def test_verify_flags_corrupted_operator(tmp_path, capsys):
    bell = str(FIXTURES / "bell.circ")
    assert _run_main("build", "--circuit", bell, "--out", str(tmp_path)) == EXIT_OK
    path = tmp_path / "operator.mtx"
    op, header = read_operator(path)
    bump = sp.csr_matrix(([0.5], ([0], [0])), shape=op.matrix.shape, dtype=complex)
    write_operator(path, OperatorMatrix(op.matrix + bump, op.lam, op.label), header)
    capsys.readouterr()

    code = _run_main("verify", "--circuit", bell, "--operator", str(path), "--out", str(tmp_path))
    assert code == EXIT_FINDINGS
    out = capsys.readouterr().out
    assert "[ERROR] residual:" in out
    report = json.loads((tmp_path / "verify.json").read_text())
    assert report["checks"]["residual"] is False
    assert report["checks"]["readout"] is True


def test_verify_operator_of_other_circuit(tmp_path, capsys):
    assert _run_main("build", "--example", "identity", "--steps", "3", "--out", str(tmp_path)) == EXIT_OK
    code = _run_main("verify", "--circuit", str(FIXTURES / "bell.circ"),
                     "--operator", str(tmp_path / "operator.mtx"), "--out", str(tmp_path))
    assert code == EXIT_INPUT


# --- example ---

def test_example_listing(capsys):
    assert _run_main("example") == EXIT_OK
    out = capsys.readouterr().out
    for name in ("deutsch-jozsa", "bell-disentangle", "identity"):
        assert name in out


def test_example_renders_circuit(capsys):
    assert _run_main("example", "bell-disentangle", "--steps", "4") == EXIT_OK
    out = capsys.readouterr().out
    assert "qubits 2" in out
    assert "CNOT 0 1" in out


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        _run_main("--version")
    assert exc.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_energy_scale_is_unity(tmp_path):
    assert _run_main("build", "--example", "deutsch-jozsa", "--out", str(tmp_path)) == EXIT_OK
    op, _ = read_operator(tmp_path / "operator.mtx")
    assert op.energy_scale == 1.0
    assert np.isclose(abs(op.matrix - op.matrix.conj().T).max(), 0.0)
