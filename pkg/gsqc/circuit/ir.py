"""Circuit intermediate representation.

A circuit is a list of layers ("steps"). Every step assigns each qubit to
exactly one operation: a single-qubit gate or one side of a CNOT. Idle qubits
carry an explicit identity gate.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

UNITARITY_TOL = 1e-12

_SQRT_HALF = 1.0 / math.sqrt(2.0)

_NAMED_MATRICES: dict[str, tuple[complex, complex, complex, complex]] = {
    "I": (1, 0, 0, 1),
    "H": (_SQRT_HALF, _SQRT_HALF, _SQRT_HALF, -_SQRT_HALF),
    "X": (0, 1, 1, 0),
    "Y": (0, -1j, 1j, 0),
    "Z": (1, 0, 0, -1),
    "S": (1, 0, 0, 1j),
    "T": (1, 0, 0, cmath.exp(1j * math.pi / 4)),
}

NAMED_GATES = frozenset(_NAMED_MATRICES)


class CircuitValidationError(Exception):
    """Raised when a circuit breaks one or more structural invariants."""

    def __init__(self, violations: list[str]) -> None:
        self.violations = list(violations)
        joined = "\n  ".join(self.violations)
        super().__init__(f"circuit validation failed:\n  {joined}")


@dataclass(frozen=True)
class Gate1Q:
    """A 2x2 gate stored as row-major complex entries.

    ``label`` is one of the named gates, ``PHASE`` (params = (theta,)) or
    ``U`` (params = the 8 reals re/im row-major).
    """
    label: str
    entries: tuple[complex, complex, complex, complex]
    params: tuple[float, ...] = ()

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.entries, dtype=complex).reshape(2, 2)

    def unitarity_error(self) -> float:
        u = self.matrix
        return float(np.max(np.abs(u.conj().T @ u - np.eye(2))))


class TwoQubitKind(Enum):
    CNOT = "CNOT"


@dataclass(frozen=True)
class Gate2Q:
    control: int
    target: int
    kind: TwoQubitKind = TwoQubitKind.CNOT


@dataclass(frozen=True)
class GateOp:
    """A single-qubit gate placed on one qubit within a step."""
    qubit: int
    gate: Gate1Q


Operation = Union[GateOp, Gate2Q]
Step = tuple[Operation, ...]


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    steps: tuple[Step, ...]
    name: str = ""

    @property
    def num_steps(self) -> int:
        return len(self.steps)

    @property
    def cnots(self) -> list[tuple[int, Gate2Q]]:
        """All CNOTs as (1-based step, gate) pairs."""
        return [
            (j, op)
            for j, step in enumerate(self.steps, start=1)
            for op in step
            if isinstance(op, Gate2Q)
        ]

    def single_qubit_gates(self, qubit: int) -> dict[int, Gate1Q]:
        """Map 1-based step -> gate for the steps where ``qubit`` has a 1Q gate."""
        gates: dict[int, Gate1Q] = {}
        for j, step in enumerate(self.steps, start=1):
            for op in step:
                if isinstance(op, GateOp) and op.qubit == qubit:
                    gates[j] = op.gate
        return gates


def named_gate(label: str) -> Gate1Q:
    key = label.upper()
    if key not in _NAMED_MATRICES:
        raise KeyError(f"unknown gate '{label}' (named gates: {sorted(NAMED_GATES)})")
    entries = tuple(complex(z) for z in _NAMED_MATRICES[key])
    return Gate1Q(label=key, entries=entries)  # type: ignore[arg-type]


def phase_gate(theta: float) -> Gate1Q:
    theta = float(theta)
    return Gate1Q(
        label="PHASE",
        entries=(1 + 0j, 0j, 0j, cmath.exp(1j * theta)),
        params=(theta,),
    )


def custom_gate(matrix: np.ndarray | list) -> Gate1Q:
    """Wrap an arbitrary 2x2 matrix as a ``U`` gate (no unitarity check here)."""
    m = np.asarray(matrix, dtype=complex).reshape(2, 2)
    entries = tuple(complex(z) for z in m.ravel())
    params = tuple(float(v) for z in entries for v in (z.real, z.imag))
    return Gate1Q(label="U", entries=entries, params=params)  # type: ignore[arg-type]


def validate(circuit: Circuit) -> list[str]:
    """Return human-readable violations; an empty list means the circuit is valid."""
    errors: list[str] = []
    m = circuit.num_qubits
    if m < 1:
        errors.append(f"circuit: num_qubits must be >= 1, got {m}")
    if circuit.num_steps < 1:
        errors.append("circuit: at least one step is required")

    for j, step in enumerate(circuit.steps, start=1):
        counts = [0] * max(m, 0)
        for op in step:
            if isinstance(op, GateOp):
                qubits: tuple[int, ...] = (op.qubit,)
                err = op.gate.unitarity_error()
                if not err <= UNITARITY_TOL:
                    errors.append(
                        f"step {j}: gate {op.gate.label} on qubit {op.qubit} "
                        f"is not unitary (error {err:.3g})"
                    )
            elif isinstance(op, Gate2Q):
                if op.kind is not TwoQubitKind.CNOT:
                    errors.append(f"step {j}: unsupported two-qubit gate {op.kind}")
                if op.control == op.target:
                    errors.append(f"step {j}: CNOT control equals target")
                    qubits = (op.control,)
                else:
                    qubits = (op.control, op.target)
            else:
                errors.append(f"step {j}: unknown operation {op!r}")
                continue

            for q in qubits:
                if 0 <= q < m:
                    counts[q] += 1
                else:
                    errors.append(f"step {j}: qubit {q} out of range (0..{m - 1})")

        for q, n in enumerate(counts):
            if n == 0:
                errors.append(f"step {j}: qubit {q} unassigned")
            elif n > 1:
                errors.append(f"step {j}: qubit {q} assigned {n} times")
    return errors


def require_valid(circuit: Circuit) -> None:
    violations = validate(circuit)
    if violations:
        raise CircuitValidationError(violations)


def concat(first: Circuit, second: Circuit, name: str | None = None) -> Circuit:
    """Run ``first`` then ``second`` on the same register."""
    if first.num_qubits != second.num_qubits:
        raise ValueError(
            f"cannot concatenate circuits on {first.num_qubits} and {second.num_qubits} qubits"
        )
    return Circuit(
        num_qubits=first.num_qubits,
        steps=first.steps + second.steps,
        name=first.name if name is None else name,
    )
