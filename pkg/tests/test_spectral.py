import math

import numpy as np
import pytest
import scipy.linalg as la
import scipy.sparse as sp

from gsqc.circuit.library import identity_chain, random_circuit
from gsqc.compiler.basis import ground_space
from gsqc.compiler.hamiltonian import build_hamiltonian
from gsqc.spectral.eigensolve import (
    DenseLimitError,
    eigensolve,
    lanczos,
    level_structure,
    lowest_levels,
)
from gsqc.spectral.exact import (
    determinant_polynomial,
    determinant_recursion,
    determinant_roots,
    exact_single_qubit_spectrum,
    single_qubit_min_gap,
    spectral_levels,
)

from conftest import CORPUS, load_fixture


# --- closed form ---

@pytest.mark.parametrize("num_steps", [3, 7, 11, 15])
def test_min_gap_closed_form(num_steps):
    lam_star, gap = single_qubit_min_gap(num_steps)
    theta = math.pi / (num_steps + 1)
    assert lam_star == pytest.approx(math.cos(theta))
    assert gap == pytest.approx(math.sin(theta) ** 2)
    assert exact_single_qubit_spectrum(num_steps, lam_star).gap == pytest.approx(gap, abs=1e-14)


def test_spectrum_at_lambda_zero_is_flat():
    spec = exact_single_qubit_spectrum(4, 0.0)
    assert spec.levels == (0.0, 1.0, 1.0, 1.0, 1.0)


def test_spectrum_scales_with_energy():
    base = exact_single_qubit_spectrum(5, 0.4)
    scaled = exact_single_qubit_spectrum(5, 0.4, energy_scale=3.0)
    assert np.allclose(np.array(scaled.levels), 3.0 * np.array(base.levels))


def test_spectrum_needs_a_step():
    with pytest.raises(ValueError):
        exact_single_qubit_spectrum(0, 0.5)


# --- determinant recursion ---

def test_polynomial_degree():
    assert determinant_polynomial(6, 0.5).degree() == 7


@pytest.mark.parametrize("num_steps", range(1, 11))
@pytest.mark.parametrize("lam", [0.2, 0.6, 1.0])
def test_determinant_roots_match_dense_eigenvalues(num_steps, lam):
    circuit = random_circuit(1, num_steps, seed=num_steps)
    values = la.eigvalsh(build_hamiltonian(circuit, lam).toarray())
    levels = [level for level, _ in spectral_levels(values)]
    roots = determinant_roots(num_steps, lam)
    assert roots.size == num_steps + 1
    assert np.max(np.abs(roots - np.array(levels))) <= 1e-8


@pytest.mark.parametrize("lam", [0.2, 0.6, 1.0])
def test_recursion_vanishes_at_closed_form_levels(lam):
    for level in exact_single_qubit_spectrum(8, lam).levels:
        assert abs(determinant_recursion(8, lam, level)) <= 1e-10


def test_roots_at_lambda_zero():
    assert np.array_equal(determinant_roots(3, 0.0), [0.0, 1.0, 1.0, 1.0])


def test_spectral_levels_groups_within_tolerance():
    levels = spectral_levels(np.array([1.0, 0.0, 1e-10, 1.0 + 5e-9, 2.0]))
    assert [m for _, m in levels] == [2, 2, 1]
    assert levels[0][0] == pytest.approx(0.0, abs=1e-9)


# --- eigensolvers ---

def test_dense_eigensolve_returns_multiplicities():
    op = build_hamiltonian(load_fixture("bell.circ"), 1.0)
    result = eigensolve(op, 5, "dense")
    assert np.allclose(result.values[:4], 0.0, atol=1e-10)
    assert result.values[4] > 1e-3
    assert result.max_residual <= 1e-10


def test_level_structure_counts_zero_space():
    op = build_hamiltonian(load_fixture("ghz3.circ"), 0.5)
    levels = level_structure(op, 2)
    assert levels[0][1] == 8
    assert levels[0][0] == pytest.approx(0.0, abs=1e-10)


def test_dense_limit():
    with pytest.raises(DenseLimitError):
        eigensolve(sp.identity(8193, format="csr"), 1, "dense")


def test_unknown_method():
    with pytest.raises(ValueError, match="unknown method"):
        eigensolve(sp.identity(4, format="csr"), 1, "qr")


def test_lanczos_matches_dense_on_tridiagonal_chain():
    op = build_hamiltonian(identity_chain(12), 0.7)
    values, vectors, iterations = lanczos(op.matrix, 3, seed=3)
    dense = [level for level, _ in spectral_levels(la.eigvalsh(op.toarray()))][:3]
    assert np.allclose(values, dense, atol=1e-8)
    assert iterations <= op.dimension


@pytest.mark.parametrize("name", ["bell", "bell-disentangle-6-before", "ghz3"])
def test_deflated_lanczos_gap_matches_dense(name):
    circuit = CORPUS[name]
    op = build_hamiltonian(circuit, 0.5)
    deflate = ground_space(circuit, 0.5)
    sparse = lowest_levels(op, 2, "lanczos", seed=11, deflate=deflate)
    dense = lowest_levels(op, 2, "dense")
    assert sparse[0] == pytest.approx(0.0, abs=1e-10)
    assert sparse[1] == pytest.approx(dense[1], abs=1e-8)


def test_lanczos_is_seed_deterministic():
    op = build_hamiltonian(load_fixture("bell.circ"), 0.3)
    a = eigensolve(op, 2, "lanczos", seed=5)
    b = eigensolve(op, 2, "lanczos", seed=5)
    assert np.array_equal(a.values, b.values)
