"""Variational gap estimates from the noninteracting zero-mode subspace.

H = H0 + H1 where H0 holds the single-qubit terms (each chain cut at its CNOT
steps) and H1 the CNOT terms. Z is spanned by products of per-qubit zero
modes of H0. Restricting H1 to Z gives a variational upper estimate of the
gap; combining it with the H0 gap outside Z gives a lower bound.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from ..circuit.ir import Circuit
from ..compiler.basis import BasisIndex, check_lambda
from ..compiler.hamiltonian import TermKind, build_terms, gershgorin_bound
from .exact import DEGENERACY_TOL, exact_single_qubit_spectrum

logger = logging.getLogger(__name__)

_CNOT_KINDS = {TermKind.CNOT_ID, TermKind.CNOT_NOT, TermKind.CNOT_PENALTY}


class BoundPreconditionError(ValueError):
    """Raised when the zero-mode subspace bound cannot be formed."""


@dataclass(frozen=True)
class ZBound:
    upper_estimate: float
    lower_bound: float
    restricted_gap: float
    h0_gap: float
    norm_bound: float
    z_dimension: int


def chain_segments(circuit: Circuit, qubit: int) -> list[tuple[int, int]]:
    """Row intervals [a, b] of ``qubit``'s chain once CNOT steps are cut."""
    cuts = sorted(j for j, g in circuit.cnots if qubit in (g.control, g.target))
    segments: list[tuple[int, int]] = []
    start = 0
    for j in cuts:
        segments.append((start, j - 1))
        start = j
    segments.append((start, circuit.num_steps))
    return segments


def qubit_zero_modes(circuit: Circuit, qubit: int, lam: float, basis: BasisIndex) -> np.ndarray:
    """Orthonormal H0 zero modes of one chain as columns (d x 2 * segments)."""
    gates = circuit.single_qubit_gates(qubit)
    d = basis.local_dim
    columns: list[np.ndarray] = []
    for a, b in chain_segments(circuit, qubit):
        for spin in (0, 1):
            v = np.zeros(d, dtype=complex)
            spinor = np.zeros(2, dtype=complex)
            spinor[spin] = 1.0
            v[2 * a : 2 * a + 2] = spinor
            for row in range(a + 1, b + 1):
                spinor = lam * (gates[row].matrix @ spinor)
                v[2 * row : 2 * row + 2] = spinor
            columns.append(v / np.linalg.norm(v))
    return np.stack(columns, axis=1)


def z_subspace_bound(circuit: Circuit, lam: float, basis: BasisIndex | None = None) -> ZBound:
    """(upper estimate, lower bound) on the gap of H(lam) from the Z subspace.

    The lower bound is z * g / (z + ||H||) with z the smallest nonzero
    restricted level of H1, g the H0 gap outside Z and ||H|| a Gershgorin
    bound.
    """
    lam = check_lambda(lam)
    if not circuit.cnots:
        raise BoundPreconditionError("circuit has no CNOT; the zero-mode bound needs at least one")
    basis = basis or BasisIndex.for_circuit(circuit)

    z = np.ones((1, 1), dtype=complex)
    for q in range(circuit.num_qubits):
        z = np.kron(z, qubit_zero_modes(circuit, q, lam, basis))

    h1 = build_terms(circuit, lam, basis, kinds=_CNOT_KINDS)
    restricted = z.conj().T @ (h1 @ z)
    restricted = 0.5 * (restricted + restricted.conj().T)
    values = la.eigvalsh(restricted)

    ground_dim = 2**circuit.num_qubits
    if values.size <= ground_dim:
        raise BoundPreconditionError(
            f"zero-mode subspace has dimension {values.size}, no room above the "
            f"{ground_dim}-fold ground space"
        )
    if abs(values[ground_dim - 1]) > 1e-8:
        raise BoundPreconditionError(
            f"restricted H1 has only {int(np.sum(np.abs(values) <= 1e-8))} zero modes, "
            f"expected {ground_dim} (lowest {values[:ground_dim + 1]})"
        )
    upper = float(values[ground_dim])
    if upper <= DEGENERACY_TOL:
        raise BoundPreconditionError(f"restricted H1 is degenerate above the ground space (level {upper:.3g})")

    g = _h0_gap(circuit, lam)
    norm = gershgorin_bound(build_terms(circuit, lam, basis))
    lower = upper * g / (upper + norm)
    logger.debug("z bound lam=%.4g: dim Z=%d upper=%.6g lower=%.6g", lam, z.shape[1], upper, lower)
    return ZBound(upper, lower, upper, g, norm, z.shape[1])


def _h0_gap(circuit: Circuit, lam: float) -> float:
    """Smallest excitation of H0 out of its zero space (closed form per segment)."""
    gaps = [
        exact_single_qubit_spectrum(b - a, lam).gap
        for q in range(circuit.num_qubits)
        for a, b in chain_segments(circuit, q)
        if b > a
    ]
    if not gaps:
        raise BoundPreconditionError("no chain segment has a single-qubit gate; H0 gap undefined")
    return min(gaps)
