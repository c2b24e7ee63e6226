from __future__ import annotations

from pathlib import Path

import numpy as np

from ..circuit.ir import Circuit
from ..circuit.parser import circuit_hash
from ..compiler.basis import BasisIndex, BasisMismatchError, ground_state
from ..compiler.hamiltonian import HamiltonianFamily, OperatorMatrix
from ..core.models import Fact
from ..export import read_operator
from ..spectral.exact import single_qubit_min_gap

# lambda values at which the analytic state is checked when no operator file is given
DEFAULT_LAMBDAS = (0.0, 0.25, 0.5, 0.75, 1.0)


class ResidualScanner:
    """Measures ||H(lambda) Psi(lambda)|| for the analytic ground state.

    With an operator file the stored matrix is checked at its recorded
    lambda; otherwise H is compiled and checked at DEFAULT_LAMBDAS and at
    the single-qubit gap minimum cos(pi/(N+1)).
    """

    name = "residual"

    def __init__(self, operator_path: Path | None = None, lambdas: tuple[float, ...] = DEFAULT_LAMBDAS) -> None:
        self._operator_path = operator_path
        self._lambdas = lambdas

    def scan(self, circuit: Circuit) -> tuple[list[Fact], list[str]]:
        basis = BasisIndex.for_circuit(circuit)
        if self._operator_path is not None:
            return self._scan_file(circuit, basis)

        family = HamiltonianFamily.from_circuit(circuit, basis)
        worst = max(_residual(family.at(lam), circuit, basis) for lam in self.lambdas_for(circuit))
        hermiticity = max(op.hermiticity_error() for _, op in family.pieces)
        source = f"{self.name}:compiled"
        return [
            Fact("ground_state.residual", worst, source),
            Fact("operator.hermiticity_error", hermiticity, source),
        ], []

    def lambdas_for(self, circuit: Circuit) -> tuple[float, ...]:
        lam_star, _ = single_qubit_min_gap(circuit.num_steps)
        return tuple(sorted({*self._lambdas, lam_star}))

    def _scan_file(self, circuit: Circuit, basis: BasisIndex) -> tuple[list[Fact], list[str]]:
        op, header = read_operator(self._operator_path)
        if op.dimension != basis.dimension:
            raise BasisMismatchError(
                f"{self._operator_path}: operator has D={op.dimension}, circuit needs D={basis.dimension}"
            )
        warnings: list[str] = []
        recorded = header.get("circuit_hash")
        if recorded and recorded != circuit_hash(circuit):
            warnings.append(f"{self._operator_path} was built from a different circuit (hash {recorded[:12]})")
        if op.lam is None:
            warnings.append(f"{self._operator_path}: no lambda recorded, assuming lambda=1")
        if not op.is_hermitian():
            error = op.hermiticity_error()
            warnings.append(f"{self._operator_path}: operator is not Hermitian (error {error:.3g})")
        lam = 1.0 if op.lam is None else float(op.lam)
        source = f"{self.name}:{self._operator_path}"
        return [
            Fact("ground_state.residual", _residual(op, circuit, basis, lam), source),
            Fact("operator.hermiticity_error", op.hermiticity_error(), source),
        ], warnings


def _residual(op: OperatorMatrix, circuit: Circuit, basis: BasisIndex, lam: float | None = None) -> float:
    lam = op.lam if lam is None else lam
    psi = ground_state(circuit, lam, basis).amplitudes
    return float(np.linalg.norm(op.matrix @ psi)) / op.energy_scale
