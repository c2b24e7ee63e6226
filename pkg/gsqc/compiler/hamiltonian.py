"""Sparse assembly of the GSQC Hamiltonian H(lambda).

Every term is built as B^dagger B from its annihilation combination B, so it
is positive semi-definite by construction. Local blocks are dense d x d (one
qubit) or d^2 x d^2 (a CNOT pair); they are embedded into the full space as
COO triplets and summed in CSR form.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.sparse as sp

from ..circuit.ir import Circuit, Gate1Q, Gate2Q, GateOp, require_valid
from .basis import BasisIndex, _matching_basis, check_lambda

logger = logging.getLogger(__name__)

HERMITICITY_TOL = 1e-12

_IDENTITY_2 = np.eye(2, dtype=complex)
_SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)


class TermIndexError(IndexError):
    """Raised when a term references a step or qubit outside the basis."""


class TermKind(Enum):
    SINGLE = "single"
    CNOT_ID = "cnot_id"
    CNOT_NOT = "cnot_not"
    CNOT_PENALTY = "cnot_penalty"


# lambda enters B linearly for single-qubit gates and as lambda^2 for CNOT pairs
_B_EXPONENT = {
    TermKind.SINGLE: 1,
    TermKind.CNOT_ID: 2,
    TermKind.CNOT_NOT: 2,
}


@dataclass(frozen=True)
class TermDescriptor:
    kind: TermKind
    step: int
    qubits: tuple[int, ...]
    gate: Gate1Q | None = None

    @property
    def exponents(self) -> tuple[int, ...]:
        if self.kind is TermKind.CNOT_PENALTY:
            return (0,)
        e = _B_EXPONENT[self.kind]
        return (0, e, 2 * e)

    def local_pieces(self, basis: BasisIndex) -> dict[int, np.ndarray]:
        """Local matrices keyed by lambda exponent; the term is sum lam^p * piece."""
        if self.kind is TermKind.CNOT_PENALTY:
            return {0: np.diag(_penalty_diagonal(basis, self.step)).astype(complex)}
        b0, b1 = self._annihilators(basis)
        e = _B_EXPONENT[self.kind]
        return {
            0: b0.conj().T @ b0,
            e: b0.conj().T @ b1 + b1.conj().T @ b0,
            2 * e: b1.conj().T @ b1,
        }

    def local_matrix(self, basis: BasisIndex, lam: float) -> np.ndarray:
        if self.kind is TermKind.CNOT_PENALTY:
            return np.diag(_penalty_diagonal(basis, self.step)).astype(complex)
        b0, b1 = self._annihilators(basis)
        b = b0 + lam ** _B_EXPONENT[self.kind] * b1
        return b.conj().T @ b

    def _annihilators(self, basis: BasisIndex) -> tuple[np.ndarray, np.ndarray]:
        """B = b0 + lam^e * b1."""
        j = self.step
        if self.kind is TermKind.SINGLE:
            u = self.gate.matrix
            return basis.row_embedding(j).astype(complex), -u @ basis.row_embedding(j - 1)

        d = basis.local_dim
        control_spin, u = (0, _IDENTITY_2) if self.kind is TermKind.CNOT_ID else (1, _SIGMA_X)
        b0 = np.zeros((2, d * d), dtype=complex)
        b1 = np.zeros((2, d * d), dtype=complex)
        for y in (0, 1):
            b0[y, (2 * j + control_spin) * d + 2 * j + y] = 1.0
            for y_prev in (0, 1):
                if u[y, y_prev] != 0:
                    b1[y, (2 * (j - 1) + control_spin) * d + 2 * (j - 1) + y_prev] = -u[y, y_prev]
        return b0, b1


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """A sparse Hermitian operator in units of the energy scale."""
    matrix: sp.csr_matrix
    lam: float | None = None
    label: str = ""
    energy_scale: float = 1.0

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def hermiticity_error(self) -> float:
        diff = self.matrix - self.matrix.conj().T
        return float(abs(diff).max()) if diff.nnz else 0.0

    def is_hermitian(self, tol: float = HERMITICITY_TOL) -> bool:
        return self.hermiticity_error() <= tol

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def __matmul__(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v


def circuit_terms(circuit: Circuit) -> list[TermDescriptor]:
    """Terms in deterministic (step, operation) order.

    A CNOT at step j replaces the single-qubit terms of both its qubits at j.
    """
    terms: list[TermDescriptor] = []
    for j, step in enumerate(circuit.steps, start=1):
        for op in step:
            if isinstance(op, GateOp):
                terms.append(TermDescriptor(TermKind.SINGLE, j, (op.qubit,), op.gate))
            elif isinstance(op, Gate2Q):
                pair = (op.control, op.target)
                terms.append(TermDescriptor(TermKind.CNOT_ID, j, pair))
                terms.append(TermDescriptor(TermKind.CNOT_NOT, j, pair))
                terms.append(TermDescriptor(TermKind.CNOT_PENALTY, j, pair))
    return terms


def build_single_gate_term(
    qubit: int,
    step: int,
    gate: Gate1Q,
    lam: float,
    basis: BasisIndex,
    energy_scale: float = 1.0,
) -> OperatorMatrix:
    lam = check_lambda(lam)
    term = TermDescriptor(TermKind.SINGLE, step, (qubit,), gate)
    _check_term(term, basis)
    matrix = energy_scale * embed(term.local_matrix(basis, lam), term.qubits, basis)
    return OperatorMatrix(matrix, lam, f"h[{qubit},{step}]({gate.label})", energy_scale)


def build_cnot_term(
    control: int,
    target: int,
    step: int,
    lam: float,
    basis: BasisIndex,
    energy_scale: float = 1.0,
) -> OperatorMatrix:
    """h(ID) + h(N) + h(P) for a CNOT between ``control`` and ``target`` at ``step``."""
    lam = check_lambda(lam)
    pair = (control, target)
    local = np.zeros((basis.local_dim**2,) * 2, dtype=complex)
    for kind in (TermKind.CNOT_ID, TermKind.CNOT_NOT, TermKind.CNOT_PENALTY):
        term = TermDescriptor(kind, step, pair)
        _check_term(term, basis)
        local += term.local_matrix(basis, lam)
    matrix = energy_scale * embed(local, pair, basis)
    return OperatorMatrix(matrix, lam, f"h[{control},{target},{step}](CNOT)", energy_scale)


def build_terms(
    circuit: Circuit,
    lam: float,
    basis: BasisIndex | None = None,
    kinds: set[TermKind] | None = None,
    energy_scale: float = 1.0,
) -> sp.csr_matrix:
    """Sum of the circuit's terms (optionally only some kinds) at ``lam``."""
    require_valid(circuit)
    lam = check_lambda(lam)
    basis = _matching_basis(circuit, basis)
    total = sp.csr_matrix((basis.dimension, basis.dimension), dtype=complex)
    for term in circuit_terms(circuit):
        if kinds is not None and term.kind not in kinds:
            continue
        total = total + embed(term.local_matrix(basis, lam), term.qubits, basis)
    return (energy_scale * total).tocsr()


def build_hamiltonian(
    circuit: Circuit,
    lam: float,
    basis: BasisIndex | None = None,
    energy_scale: float = 1.0,
) -> OperatorMatrix:
    matrix = build_terms(circuit, lam, basis, energy_scale=energy_scale)
    logger.debug("assembled H(%.6g) for %s: D=%d nnz=%d", lam, circuit.name or "circuit",
                 matrix.shape[0], matrix.nnz)
    return OperatorMatrix(matrix, float(lam), f"H({circuit.name})" if circuit.name else "H", energy_scale)


def decompose_lambda(
    circuit: Circuit,
    basis: BasisIndex | None = None,
    energy_scale: float = 1.0,
) -> list[tuple[int, OperatorMatrix]]:
    """Exact split H(lam) = sum_p lam^p H_p, ascending p, empty pieces dropped."""
    require_valid(circuit)
    basis = _matching_basis(circuit, basis)
    pieces: dict[int, sp.csr_matrix] = {}
    for term in circuit_terms(circuit):
        for p, local in term.local_pieces(basis).items():
            m = embed(local, term.qubits, basis)
            pieces[p] = pieces[p] + m if p in pieces else m
    out: list[tuple[int, OperatorMatrix]] = []
    for p in sorted(pieces):
        m = (energy_scale * pieces[p]).tocsr()
        m.eliminate_zeros()
        if m.nnz:
            out.append((p, OperatorMatrix(m, None, f"H_{p}", energy_scale)))
    return out


@dataclass(eq=False)
class HamiltonianFamily:
    """H(lam) re-assembled from its polynomial pieces."""
    pieces: list[tuple[int, OperatorMatrix]]
    basis: BasisIndex
    energy_scale: float = 1.0
    label: str = "H"
    _dense: dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    @classmethod
    def from_circuit(
        cls,
        circuit: Circuit,
        basis: BasisIndex | None = None,
        energy_scale: float = 1.0,
    ) -> HamiltonianFamily:
        basis = _matching_basis(circuit, basis)
        label = f"H({circuit.name})" if circuit.name else "H"
        return cls(decompose_lambda(circuit, basis, energy_scale), basis, energy_scale, label)

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    @property
    def exponents(self) -> list[int]:
        return [p for p, _ in self.pieces]

    def combine(self, coefficients: dict[int, float]) -> sp.csr_matrix:
        """sum_p coefficients[p] * H_p (missing exponents count as zero)."""
        total = sp.csr_matrix((self.dimension, self.dimension), dtype=complex)
        for p, op in self.pieces:
            c = coefficients.get(p, 0.0)
            if c:
                total = total + c * op.matrix
        return total.tocsr()

    def at(self, lam: float) -> OperatorMatrix:
        lam = check_lambda(lam)
        matrix = self.combine({p: lam**p for p, _ in self.pieces})
        return OperatorMatrix(matrix, lam, self.label, self.energy_scale)

    def at_dense(self, lam: float) -> np.ndarray:
        lam = check_lambda(lam)
        return self.combine_dense({p: lam**p for p, _ in self.pieces})

    def combine_dense(self, coefficients: dict[int, float]) -> np.ndarray:
        if not self._dense:
            self._dense.update({p: op.toarray() for p, op in self.pieces})
        out = np.zeros((self.dimension, self.dimension), dtype=complex)
        for p, piece in self._dense.items():
            c = coefficients.get(p, 0.0)
            if c:
                out += c * piece
        return out

    def norm_bound(self) -> float:
        """Gershgorin bound on ||H(lam)|| valid for every lam in [0, 1]."""
        total = sp.csr_matrix((self.dimension, self.dimension))
        for _, op in self.pieces:
            total = total + abs(op.matrix)
        return gershgorin_bound(total)


def gershgorin_bound(matrix: sp.spmatrix) -> float:
    """Largest absolute row sum, an upper bound on the spectral radius."""
    if matrix.shape[0] == 0:
        return 0.0
    return float(np.max(np.asarray(abs(matrix).sum(axis=1)).ravel()))


def embed(local: np.ndarray, qubits: tuple[int, ...], basis: BasisIndex) -> sp.csr_matrix:
    """Lift a local operator on ``qubits`` to the full space (identity elsewhere).

    ``local`` is indexed by the local indices of ``qubits`` in the given
    order, first qubit most significant.
    """
    d = basis.local_dim
    m = basis.num_qubits
    dim = basis.dimension
    strides = [d ** (m - 1 - q) for q in range(m)]

    coo = sp.coo_matrix(local)
    local_offsets = np.zeros(d ** len(qubits), dtype=np.int64)
    for pos, q in enumerate(qubits):
        digit = (np.arange(d ** len(qubits)) // d ** (len(qubits) - 1 - pos)) % d
        local_offsets += digit * strides[q]

    others = [q for q in range(m) if q not in qubits]
    rest = np.zeros(1, dtype=np.int64)
    for q in others:
        rest = (rest[:, None] + np.arange(d, dtype=np.int64)[None, :] * strides[q]).ravel()

    rows = (local_offsets[coo.row][:, None] + rest[None, :]).ravel()
    cols = (local_offsets[coo.col][:, None] + rest[None, :]).ravel()
    vals = np.repeat(coo.data, rest.size)
    return sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim), dtype=complex).tocsr()


def _penalty_diagonal(basis: BasisIndex, step: int) -> np.ndarray:
    """1 where exactly one of the pair has crossed row ``step``."""
    d = basis.local_dim
    rows = np.arange(d) // 2
    r_a = np.repeat(rows, d)
    r_b = np.tile(rows, d)
    crossed_a = r_a >= step
    crossed_b = r_b >= step
    return (crossed_a != crossed_b).astype(float)


def _check_term(term: TermDescriptor, basis: BasisIndex) -> None:
    if not 1 <= term.step <= basis.num_steps:
        raise TermIndexError(f"step {term.step} out of range (1..{basis.num_steps})")
    for q in term.qubits:
        if not 0 <= q < basis.num_qubits:
            raise TermIndexError(f"qubit {q} out of range (0..{basis.num_qubits - 1})")
    if len(term.qubits) == 2 and term.qubits[0] == term.qubits[1]:
        raise TermIndexError(f"CNOT control equals target ({term.qubits[0]})")
