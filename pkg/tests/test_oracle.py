import numpy as np
import pytest

from gsqc.circuit.ir import concat
from gsqc.circuit.library import (
    BELL_STAGES,
    FamilySizeError,
    bell_disentangle,
    bundled,
    deutsch_jozsa_example,
    family,
    identity_chain,
    random_circuit,
)
from gsqc.circuit.oracle import apply_circuit, basis_state, fidelity, simulate, step_trajectory

from conftest import load_fixture


# --- simulator ---

def test_bell_state():
    state = simulate(load_fixture("bell.circ"))
    expected = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert fidelity(state, expected) == pytest.approx(1.0)


def test_ghz3_state():
    state = simulate(load_fixture("ghz3.circ"))
    probs = state.probabilities()
    assert probs[0] == pytest.approx(0.5)
    assert probs[7] == pytest.approx(0.5)


def test_input_bits_select_basis_state():
    # H|1> = |0> - |1>, then CNOT 0 1; qubit 0 is the most significant bit
    circuit = load_fixture("bell.circ")
    state = simulate(circuit, (1, 0))
    expected = np.array([1, 0, 0, -1]) / np.sqrt(2)
    assert fidelity(state, expected) == pytest.approx(1.0)


def test_trajectory_has_one_state_per_layer():
    traj = step_trajectory(load_fixture("ghz3.circ"))
    assert len(traj) == 4
    assert all(s.norm == pytest.approx(1.0) for s in traj)


def test_fidelity_ignores_global_phase():
    a = np.array([1, 1j]) / np.sqrt(2)
    assert fidelity(a, np.exp(0.7j) * a) == pytest.approx(1.0)
    assert fidelity(a, np.array([1, -1j]) / np.sqrt(2)) == pytest.approx(0.0)


def test_layers_compose_associatively():
    a = random_circuit(2, 3, seed=11)
    b = random_circuit(2, 4, seed=12)
    start = basis_state(2, (1, 0))
    split = apply_circuit(b, apply_circuit(a, start))
    joined = apply_circuit(concat(a, b), start)
    assert np.allclose(split.amplitudes, joined.amplitudes)


def test_apply_circuit_rejects_wrong_register():
    with pytest.raises(ValueError, match="qubits"):
        apply_circuit(load_fixture("bell.circ"), basis_state(1))


def test_basis_state_checks_bit_count():
    with pytest.raises(ValueError):
        basis_state(2, (1,))


# --- bundled circuits ---

@pytest.mark.parametrize("f, expected_bit", [((0, 0), 0), ((1, 1), 0), ((0, 1), 1), ((1, 0), 1)])
def test_deutsch_jozsa_reads_out_parity(f, expected_bit):
    probs = simulate(deutsch_jozsa_example(f)).probabilities()
    assert probs[expected_bit] == pytest.approx(1.0)


@pytest.mark.parametrize("stage", BELL_STAGES)
def test_bell_disentangle_has_requested_shape(stage):
    c = bell_disentangle(8, stage)
    assert c.num_qubits == 2
    assert c.num_steps == 8
    assert len(c.cnots) == 2


def test_bell_disentangle_middle_returns_to_zero():
    probs = simulate(bell_disentangle(9, "middle")).probabilities()
    assert probs[0] == pytest.approx(1.0)


def test_families_reject_too_few_steps():
    with pytest.raises(FamilySizeError, match="at least 4") as exc:
        bell_disentangle(3)
    assert exc.value.minimum == 4
    with pytest.raises(FamilySizeError, match="at least 1"):
        identity_chain(0)


def test_identity_chain_is_trivial():
    assert simulate(identity_chain(4)).probabilities()[0] == pytest.approx(1.0)


def test_random_circuit_is_reproducible():
    assert random_circuit(3, 5, seed=4) == random_circuit(3, 5, seed=4)
    assert random_circuit(3, 5, seed=4) != random_circuit(3, 5, seed=5)


def test_random_circuit_without_cnots():
    assert random_circuit(3, 6, seed=1, cnot_probability=0.0).cnots == []


def test_bundled_and_family_lookup():
    assert bundled("identity", num_steps=3) == identity_chain(3)
    assert family("bell-disentangle", "after")(5) == bell_disentangle(5, "after")
    with pytest.raises(KeyError):
        bundled("nope")
    with pytest.raises(KeyError):
        family("nope")
