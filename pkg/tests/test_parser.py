import numpy as np
import pytest

from gsqc.circuit.ir import (
    Circuit,
    CircuitValidationError,
    Gate2Q,
    GateOp,
    concat,
    custom_gate,
    named_gate,
    validate,
)
from gsqc.circuit.parser import CircuitSyntaxError, circuit_hash, parse_circuit, render_circuit

from conftest import CORPUS, FIXTURES, load_fixture


# --- parsing ---

def test_parse_bell_fixture():
    c = load_fixture("bell.circ")
    assert c.name == "bell"
    assert c.num_qubits == 2
    assert c.num_steps == 2
    assert c.steps[1] == (Gate2Q(control=0, target=1),)
    assert c.cnots == [(2, Gate2Q(0, 1))]


def test_semicolon_separates_statements():
    c = parse_circuit("qubits 1; step H 0; step X 0")
    assert c.num_steps == 2
    assert c.steps[1][0].gate == named_gate("X")


def test_comments_and_blank_lines_ignored():
    c = parse_circuit("# header\n\nqubits 1   # one qubit\nstep Z 0\n")
    assert c.steps == ((GateOp(0, named_gate("Z")),),)


def test_u_gate_accepts_eight_or_four_reals():
    eight = parse_circuit("qubits 1\nstep U(0,0, 1,0, 1,0, 0,0) 0")
    four = parse_circuit("qubits 1\nstep U(0, 1, 1, 0) 0")
    assert np.allclose(eight.steps[0][0].gate.matrix, named_gate("X").matrix)
    assert np.allclose(four.steps[0][0].gate.matrix, named_gate("X").matrix)


def test_phase_gate_parameter():
    c = parse_circuit("qubits 1\nstep PHASE(0.5) 0")
    gate = c.steps[0][0].gate
    assert gate.label == "PHASE"
    assert gate.matrix[1, 1] == pytest.approx(np.exp(0.5j))


def test_gate_names_are_case_insensitive():
    c = parse_circuit("qubits 2\nstep h 0, i 1\nstep cnot 0 1")
    assert c.steps[0][0].gate.label == "H"
    assert c.steps[1] == (Gate2Q(0, 1),)


# --- syntax errors ---

def test_unknown_gate_reports_line_and_column():
    with pytest.raises(CircuitSyntaxError) as exc:
        parse_circuit((FIXTURES / "bad_syntax.circ").read_text())
    assert exc.value.line == 3
    assert exc.value.column == 6
    assert "FOO" in exc.value.reason


def test_missing_qubits_header():
    with pytest.raises(CircuitSyntaxError, match="qubits"):
        parse_circuit("step H 0")


def test_duplicate_qubits_header():
    with pytest.raises(CircuitSyntaxError, match="duplicate"):
        parse_circuit("qubits 1\nqubits 2\nstep H 0")


def test_cnot_needs_two_qubits():
    with pytest.raises(CircuitSyntaxError, match="control and a target"):
        parse_circuit("qubits 2\nstep CNOT 0")


def test_bad_number_in_parameters():
    with pytest.raises(CircuitSyntaxError, match="number"):
        parse_circuit("qubits 1\nstep PHASE(abc) 0")


def test_empty_gate_in_step():
    with pytest.raises(CircuitSyntaxError, match="empty gate"):
        parse_circuit("qubits 2\nstep H 0,, I 1")


# --- validation ---

def test_non_unitary_gate_rejected():
    with pytest.raises(CircuitValidationError) as exc:
        parse_circuit((FIXTURES / "non_unitary.circ").read_text())
    assert any("not unitary" in v for v in exc.value.violations)


def test_unassigned_qubit_rejected():
    with pytest.raises(CircuitValidationError, match="qubit 1 unassigned"):
        parse_circuit("qubits 2\nstep H 0")


def test_double_assignment_rejected():
    with pytest.raises(CircuitValidationError, match="assigned 2 times"):
        parse_circuit("qubits 2\nstep H 0, CNOT 0 1")


def test_out_of_range_qubit_rejected():
    with pytest.raises(CircuitValidationError, match="out of range"):
        parse_circuit("qubits 1\nstep H 3")


def test_cnot_control_equals_target():
    c = Circuit(2, ((Gate2Q(1, 1), GateOp(0, named_gate("I"))),))
    assert any("control equals target" in v for v in validate(c))


def test_empty_circuit_is_invalid():
    assert validate(Circuit(1, ())) == ["circuit: at least one step is required"]


# --- rendering ---

@pytest.mark.parametrize("name", sorted(CORPUS))
def test_render_then_parse_is_identity(name):
    circuit = CORPUS[name]
    assert parse_circuit(render_circuit(circuit)) == circuit


def test_render_uses_eight_real_u_form():
    c = Circuit(1, ((GateOp(0, custom_gate([[0, 1], [1, 0]])),),))
    assert "U(0,0,1,0,1,0,0,0) 0" in render_circuit(c)


def test_circuit_hash_is_stable_and_content_sensitive():
    bell = load_fixture("bell.circ")
    assert circuit_hash(bell) == circuit_hash(load_fixture("bell.circ"))
    assert circuit_hash(bell) != circuit_hash(load_fixture("ghz3.circ"))
    assert len(circuit_hash(bell)) == 64


def test_concat_appends_steps():
    dj = load_fixture("deutsch_jozsa.circ")
    joined = concat(dj, dj)
    assert joined.num_steps == 6
    assert joined.steps[:3] == dj.steps


def test_concat_rejects_mismatched_registers():
    with pytest.raises(ValueError, match="qubits"):
        concat(load_fixture("bell.circ"), load_fixture("deutsch_jozsa.circ"))
