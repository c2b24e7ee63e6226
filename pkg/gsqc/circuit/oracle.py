"""Reference statevector simulator for layered circuits.

Qubit 0 is the most significant bit of the 2^M amplitude index, matching the
GSQC basis ordering.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ir import Circuit, Gate2Q, GateOp, Step, require_valid

_SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)


@dataclass(frozen=True, eq=False)
class CircuitState:
    amplitudes: np.ndarray
    num_qubits: int

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def basis_state(num_qubits: int, bits: tuple[int, ...] | None = None) -> CircuitState:
    bits = bits or (0,) * num_qubits
    if len(bits) != num_qubits:
        raise ValueError(f"expected {num_qubits} input bits, got {len(bits)}")
    amps = np.zeros(2**num_qubits, dtype=complex)
    amps[int("".join(str(int(b)) for b in bits), 2)] = 1.0
    return CircuitState(amps, num_qubits)


def simulate(circuit: Circuit, input_bits: tuple[int, ...] | None = None) -> CircuitState:
    """Return U_N ... U_1 |input> (|0...0> by default)."""
    return step_trajectory(circuit, input_bits)[-1]


def step_trajectory(circuit: Circuit, input_bits: tuple[int, ...] | None = None) -> list[CircuitState]:
    """States after 0..N layers."""
    require_valid(circuit)
    state = basis_state(circuit.num_qubits, input_bits)
    trajectory = [state]
    for step in circuit.steps:
        state = CircuitState(_apply_step(step, state.amplitudes, circuit.num_qubits), circuit.num_qubits)
        trajectory.append(state)
    return trajectory


def apply_circuit(circuit: Circuit, state: CircuitState) -> CircuitState:
    if state.num_qubits != circuit.num_qubits:
        raise ValueError(
            f"state has {state.num_qubits} qubits, circuit has {circuit.num_qubits}"
        )
    require_valid(circuit)
    amps = state.amplitudes
    for step in circuit.steps:
        amps = _apply_step(step, amps, circuit.num_qubits)
    return CircuitState(amps, circuit.num_qubits)


def fidelity(a: np.ndarray | CircuitState, b: np.ndarray | CircuitState) -> float:
    """|<a|b>|^2 / (|a|^2 |b|^2), insensitive to global phase."""
    va = a.amplitudes if isinstance(a, CircuitState) else np.asarray(a)
    vb = b.amplitudes if isinstance(b, CircuitState) else np.asarray(b)
    denom = np.vdot(va, va).real * np.vdot(vb, vb).real
    if denom == 0:
        return 0.0
    return float(abs(np.vdot(va, vb)) ** 2 / denom)


def _apply_step(step: Step, amps: np.ndarray, num_qubits: int) -> np.ndarray:
    psi = amps.reshape((2,) * num_qubits)
    for op in step:
        if isinstance(op, GateOp):
            psi = _apply_1q(psi, op.gate.matrix, op.qubit)
        elif isinstance(op, Gate2Q):
            psi = _apply_cnot(psi, op.control, op.target)
    return psi.reshape(-1)


def _apply_1q(psi: np.ndarray, u: np.ndarray, qubit: int) -> np.ndarray:
    out = np.tensordot(u, psi, axes=([1], [qubit]))
    return np.moveaxis(out, 0, qubit)


def _apply_cnot(psi: np.ndarray, control: int, target: int) -> np.ndarray:
    out = psi.copy()
    sel = [slice(None)] * psi.ndim
    sel[control] = 1
    sub = psi[tuple(sel)]
    # target axis index shifts down by one once the control axis is removed
    t_axis = target if target < control else target - 1
    out[tuple(sel)] = np.moveaxis(np.tensordot(_SIGMA_X, sub, axes=([1], [t_axis])), 0, t_axis)
    return out
