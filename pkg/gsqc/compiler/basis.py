"""GSQC Hilbert-space indexing and the analytic ground state.

Each qubit owns one particle on a chain of rows 0..N with a spin-1/2 label,
so its local space has d = 2(N+1) states with local index 2*row + spin. The
full space is the tensor product over qubits, qubit 0 most significant.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..circuit.ir import Circuit, Gate2Q, GateOp, require_valid

EMPTY_ROW_TOL = 1e-300

_IDENTITY_2 = np.eye(2, dtype=complex)
_SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)


class LambdaRangeError(ValueError):
    """Raised when a coupling lies outside [0, 1]."""


class BasisMismatchError(ValueError):
    """Raised when a basis does not match a circuit's (M, N)."""


class QubitRangeError(IndexError):
    """Raised when a qubit id is outside 0..M-1."""


class EmptyFinalRowError(ValueError):
    """Raised when the final row carries (numerically) no weight."""

    def __init__(self, probability: float) -> None:
        self.probability = probability
        super().__init__(f"final row unoccupied (probability {probability:.3g})")


def check_lambda(lam: float) -> float:
    lam = float(lam)
    if not 0.0 <= lam <= 1.0:
        raise LambdaRangeError(f"lambda must be in [0, 1], got {lam}")
    return lam


@dataclass(frozen=True)
class BasisIndex:
    num_qubits: int
    num_steps: int

    @classmethod
    def for_circuit(cls, circuit: Circuit) -> BasisIndex:
        return cls(circuit.num_qubits, circuit.num_steps)

    @property
    def local_dim(self) -> int:
        return 2 * (self.num_steps + 1)

    @property
    def dimension(self) -> int:
        return self.local_dim**self.num_qubits

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.local_dim,) * self.num_qubits

    def local_index(self, row: int, spin: int) -> int:
        if not 0 <= row <= self.num_steps or spin not in (0, 1):
            raise IndexError(f"(row {row}, spin {spin}) outside rows 0..{self.num_steps}")
        return 2 * row + spin

    def encode(self, config: tuple[tuple[int, int], ...]) -> int:
        if len(config) != self.num_qubits:
            raise ValueError(f"expected {self.num_qubits} (row, spin) pairs, got {len(config)}")
        flat = 0
        for row, spin in config:
            flat = flat * self.local_dim + self.local_index(row, spin)
        return flat

    def decode(self, index: int) -> tuple[tuple[int, int], ...]:
        if not 0 <= index < self.dimension:
            raise IndexError(f"flat index {index} outside 0..{self.dimension - 1}")
        locals_ = np.unravel_index(index, self.shape)
        return tuple((int(k) // 2, int(k) % 2) for k in locals_)

    def row_embedding(self, row: int) -> np.ndarray:
        """2 x d matrix picking the spin pair of ``row`` out of a chain."""
        e = np.zeros((2, self.local_dim))
        e[0, 2 * row] = 1.0
        e[1, 2 * row + 1] = 1.0
        return e

    def hop(self, step: int, u: np.ndarray) -> np.ndarray:
        """d x d operator E_j^T U E_{j-1}: move row j-1 to row j applying U."""
        return self.row_embedding(step).T @ u @ self.row_embedding(step - 1)

    def check_qubit(self, qubit: int) -> None:
        if not 0 <= qubit < self.num_qubits:
            raise QubitRangeError(f"qubit {qubit} out of range (0..{self.num_qubits - 1})")


@dataclass(frozen=True, eq=False)
class StateVector:
    """Amplitudes over a BasisIndex.

    ``norm_constant`` keeps the pre-normalization norm of analytic states.
    """
    amplitudes: np.ndarray
    basis: BasisIndex
    normalized: bool = True
    norm_constant: float = 1.0

    def __post_init__(self) -> None:
        if self.amplitudes.shape != (self.basis.dimension,):
            raise BasisMismatchError(
                f"amplitude vector of shape {self.amplitudes.shape} does not fit "
                f"dimension {self.basis.dimension}"
            )

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def as_tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.basis.shape)

    def overlap(self, other: StateVector | np.ndarray) -> complex:
        v = other.amplitudes if isinstance(other, StateVector) else other
        return complex(np.vdot(self.amplitudes, v))


@dataclass(frozen=True, eq=False)
class ConditionalState:
    amplitudes: np.ndarray
    probability: float


def initial_state(basis: BasisIndex, input_bits: tuple[int, ...] | None = None) -> StateVector:
    """Every qubit at row 0 with spin given by ``input_bits`` (all 0 by default)."""
    bits = _input_bits(basis, input_bits)
    amps = np.zeros(basis.dimension, dtype=complex)
    amps[basis.encode(tuple((0, b) for b in bits))] = 1.0
    return StateVector(amps, basis)


def ground_state(
    circuit: Circuit,
    lam: float,
    basis: BasisIndex | None = None,
    input_bits: tuple[int, ...] | None = None,
) -> StateVector:
    """Zero-energy state of H(lam) for one input bitstring.

    Built by applying, for each step j, the factor (1 + lam E_j^T U E_{j-1})
    per single-qubit gate and the CNOT factor with lam^2 hopping on both
    chains (identity on the target for control spin 0, sigma_x for spin 1).
    """
    require_valid(circuit)
    lam = check_lambda(lam)
    basis = _matching_basis(circuit, basis)
    bits = _input_bits(basis, input_bits)

    psi = np.zeros(basis.shape, dtype=complex)
    psi[tuple(2 * b for b in bits)] = 1.0

    for j, step in enumerate(circuit.steps, start=1):
        for op in step:
            if isinstance(op, GateOp):
                psi = psi + lam * _apply_local(psi, basis.hop(j, op.gate.matrix), (op.qubit,))
            elif isinstance(op, Gate2Q):
                psi = psi + lam**2 * _apply_local(psi, cnot_hop(basis, j), (op.control, op.target))

    flat = psi.reshape(-1)
    norm = float(np.linalg.norm(flat))
    return StateVector(flat / norm, basis, normalized=True, norm_constant=norm)


def cnot_hop(basis: BasisIndex, step: int) -> np.ndarray:
    """d^2 x d^2 pair hop for a CNOT at ``step``, control on the first factor."""
    d = basis.local_dim
    prev = step - 1
    out = np.zeros((d * d, d * d), dtype=complex)
    for control_spin, u in ((0, _IDENTITY_2), (1, _SIGMA_X)):
        a_to = 2 * step + control_spin
        a_from = 2 * prev + control_spin
        for y in (0, 1):
            for y_prev in (0, 1):
                if u[y, y_prev] != 0:
                    out[a_to * d + 2 * step + y, a_from * d + 2 * prev + y_prev] = u[y, y_prev]
    return out


def ground_space(circuit: Circuit, lam: float, basis: BasisIndex | None = None) -> np.ndarray:
    """All 2^M input-sector ground states as orthonormal columns (D x 2^M)."""
    basis = _matching_basis(circuit, basis)
    columns = [
        ground_state(circuit, lam, basis, bits).amplitudes
        for bits in itertools.product((0, 1), repeat=circuit.num_qubits)
    ]
    return np.stack(columns, axis=1)


def select_input_sector(
    vectors: np.ndarray,
    basis: BasisIndex,
    input_bits: tuple[int, ...] | None = None,
) -> StateVector:
    """Pick the state with the given row-0 input out of a computed zero space.

    ``vectors`` holds any basis of the zero space as columns; the combination
    whose all-row-0 amplitudes are the unit vector on ``input_bits`` is
    returned normalized.
    """
    bits = _input_bits(basis, input_bits)
    rows = [
        basis.encode(tuple((0, b) for b in config))
        for config in itertools.product((0, 1), repeat=basis.num_qubits)
    ]
    target = np.zeros(len(rows), dtype=complex)
    target[int("".join(str(b) for b in bits), 2)] = 1.0
    coeffs = np.linalg.pinv(vectors[rows, :]) @ target
    v = vectors @ coeffs
    norm = float(np.linalg.norm(v))
    if norm == 0:
        raise ValueError("zero space has no component on the requested input sector")
    return StateVector(v / norm, basis)


def row_marginal(psi: StateVector, qubit: int) -> np.ndarray:
    """Probability of finding ``qubit``'s particle at each row 0..N."""
    basis = psi.basis
    basis.check_qubit(qubit)
    probs = np.abs(psi.as_tensor()) ** 2
    other = tuple(a for a in range(basis.num_qubits) if a != qubit)
    local = probs.sum(axis=other) if other else probs
    rows = local.reshape(basis.num_steps + 1, 2).sum(axis=1)
    return rows / rows.sum()


def final_row_conditional(psi: StateVector) -> ConditionalState:
    """Renormalized spin amplitudes with every qubit at row N (2^M vector)."""
    basis = psi.basis
    n = basis.num_steps
    block = psi.as_tensor()[(slice(2 * n, 2 * n + 2),) * basis.num_qubits]
    amps = block.reshape(-1)
    weight = float(np.vdot(amps, amps).real)
    total = float(np.vdot(psi.amplitudes, psi.amplitudes).real)
    probability = weight / total if total > 0 else 0.0
    if probability < EMPTY_ROW_TOL:
        raise EmptyFinalRowError(probability)
    return ConditionalState(amps / np.sqrt(weight), probability)


def tensor_product(states: list[StateVector]) -> np.ndarray:
    """Kronecker product of single-qubit GSQC states (qubit 0 first)."""
    out = np.ones(1, dtype=complex)
    for s in states:
        out = np.kron(out, s.amplitudes)
    return out


def _apply_local(psi: np.ndarray, op: np.ndarray, axes: tuple[int, ...]) -> np.ndarray:
    d = psi.shape[0]
    k = len(axes)
    local = op.reshape((d,) * (2 * k))
    out = np.tensordot(local, psi, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


def _matching_basis(circuit: Circuit, basis: BasisIndex | None) -> BasisIndex:
    if basis is None:
        return BasisIndex.for_circuit(circuit)
    if (basis.num_qubits, basis.num_steps) != (circuit.num_qubits, circuit.num_steps):
        raise BasisMismatchError(
            f"basis is (M={basis.num_qubits}, N={basis.num_steps}) but circuit is "
            f"(M={circuit.num_qubits}, N={circuit.num_steps})"
        )
    return basis


def _input_bits(basis: BasisIndex, input_bits: tuple[int, ...] | None) -> tuple[int, ...]:
    if input_bits is None:
        return (0,) * basis.num_qubits
    bits = tuple(int(b) for b in input_bits)
    if len(bits) != basis.num_qubits or any(b not in (0, 1) for b in bits):
        raise ValueError(f"input_bits must be {basis.num_qubits} values in {{0, 1}}, got {input_bits}")
    return bits
