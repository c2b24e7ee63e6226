from __future__ import annotations

import itertools

import numpy as np

from ..circuit.ir import Circuit
from ..circuit.oracle import fidelity, simulate
from ..compiler.basis import BasisIndex, final_row_conditional, ground_space, select_input_sector
from ..compiler.hamiltonian import OperatorMatrix, build_hamiltonian
from ..core.models import Fact
from ..spectral.eigensolve import RESIDUAL_TOL, eigensolve
from ..spectral.exact import DEGENERACY_TOL
from ..spectral.gaps import default_seed


class ReadoutScanner:
    """Compares the final-row readout of the lambda=1 ground space with the
    state-vector simulator, for every input bitstring.

    ``dense`` solves for the lowest 2^M + 1 eigenpairs and reads out the
    numerical zero space. Lanczos cannot resolve multiplicities, so
    ``lanczos`` instead takes the analytic zero space, checks that each of
    its vectors is a zero mode and that the lowest level orthogonal to it is
    not, and reads out the analytic vectors.
    """

    name = "readout"

    def __init__(self, method: str = "dense", seed: int | None = None) -> None:
        self._method = method
        self._seed = seed

    def scan(self, circuit: Circuit) -> tuple[list[Fact], list[str]]:
        basis = BasisIndex.for_circuit(circuit)
        sectors = 2**circuit.num_qubits
        op = build_hamiltonian(circuit, 1.0, basis)
        if self._method == "lanczos":
            space, zero_count = self._analytic_zero_space(circuit, op, basis)
        else:
            result = eigensolve(op, min(sectors + 1, basis.dimension), "dense")
            space = result.vectors[:, :sectors]
            zero_count = int((abs(result.values) <= DEGENERACY_TOL).sum())

        worst = 1.0
        for bits in itertools.product((0, 1), repeat=circuit.num_qubits):
            psi = select_input_sector(space, basis, bits)
            readout = final_row_conditional(psi)
            worst = min(worst, fidelity(readout.amplitudes, simulate(circuit, bits)))

        source = f"{self.name}:{self._method}"
        warnings: list[str] = []
        if zero_count != sectors:
            warnings.append(f"zero space has dimension {zero_count}, expected {sectors}")
        return [
            Fact("readout.infidelity", max(0.0, 1.0 - worst), source),
            Fact("readout.zero_space_dimension_matches", zero_count == sectors, source),
        ], warnings

    def _analytic_zero_space(
        self, circuit: Circuit, op: OperatorMatrix, basis: BasisIndex
    ) -> tuple[np.ndarray, int]:
        space = ground_space(circuit, 1.0, basis)
        residuals = np.linalg.norm(op.matrix @ space, axis=0)
        zero_count = int((residuals <= RESIDUAL_TOL).sum())
        if space.shape[1] < basis.dimension:
            seed = default_seed(circuit) if self._seed is None else self._seed
            above = eigensolve(op, 2, "lanczos", seed, deflate=space).values[1]
            if abs(above) <= DEGENERACY_TOL:
                zero_count += 1
        return space, zero_count
