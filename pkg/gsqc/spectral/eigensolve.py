"""Lowest eigenpairs of assembled operators: dense LAPACK or Lanczos."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from ..compiler.hamiltonian import OperatorMatrix
from .exact import DEGENERACY_TOL, spectral_levels

logger = logging.getLogger(__name__)

DENSE_MAX_DIM = 8192
RESIDUAL_TOL = 1e-8
RITZ_TOL = 1e-10
METHODS = ("dense", "lanczos")

_BREAKDOWN_TOL = 1e-12
_CHECK_EVERY = 5
_DEFAULT_MAX_ITER = 600


class EigensolverError(RuntimeError):
    """Raised when an iterative eigensolve does not converge."""

    def __init__(self, residual: float, iterations: int) -> None:
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"Lanczos did not converge after {iterations} iterations (residual {residual:.3g})"
        )


class DenseLimitError(ValueError):
    """Raised when a dense solve is requested above DENSE_MAX_DIM."""


@dataclass(frozen=True, eq=False)
class EigenResult:
    values: np.ndarray
    vectors: np.ndarray
    method: str
    residuals: np.ndarray

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals)) if self.residuals.size else 0.0


def eigensolve(
    op: OperatorMatrix | sp.spmatrix,
    k: int,
    method: str = "dense",
    seed: int = 0,
    deflate: np.ndarray | None = None,
) -> EigenResult:
    """k smallest eigenpairs, ascending.

    ``dense`` returns eigenvalues with multiplicity. ``lanczos`` (block size
    one) returns distinct levels; when ``deflate`` holds orthonormal zero
    modes the Krylov space is kept orthogonal to them and their Rayleigh
    quotient is reported as the lowest level.
    """
    matrix = op.matrix if isinstance(op, OperatorMatrix) else sp.csr_matrix(op)
    n = matrix.shape[0]
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if method == "dense":
        if n > DENSE_MAX_DIM:
            raise DenseLimitError(f"dense eigensolve limited to D <= {DENSE_MAX_DIM}, got D={n}")
        k = min(k, n)
        values, vectors = la.eigh(matrix.toarray(), subset_by_index=[0, k - 1])
        return EigenResult(values, vectors, "dense", _residuals(matrix, values, vectors))
    if method == "lanczos":
        return _lanczos_levels(matrix, k, seed, deflate)
    raise ValueError(f"unknown method '{method}' (valid: {', '.join(METHODS)})")


def lowest_levels(
    op: OperatorMatrix | sp.spmatrix,
    count: int,
    method: str = "dense",
    seed: int = 0,
    deflate: np.ndarray | None = None,
) -> np.ndarray:
    """The ``count`` lowest distinct energy levels."""
    if method == "lanczos":
        return eigensolve(op, count, "lanczos", seed, deflate).values[:count]
    return np.array([level for level, _ in level_structure(op, count)[:count]])


def level_structure(op: OperatorMatrix | sp.spmatrix, count: int) -> list[tuple[float, int]]:
    """(level, multiplicity) for at least ``count`` lowest levels, dense.

    The multiplicity of the last returned level may be truncated.
    """
    matrix = op.matrix if isinstance(op, OperatorMatrix) else sp.csr_matrix(op)
    n = matrix.shape[0]
    if n > DENSE_MAX_DIM:
        raise DenseLimitError(f"dense eigensolve limited to D <= {DENSE_MAX_DIM}, got D={n}")
    dense = matrix.toarray()
    k = min(n, max(2 * count, 8))
    while True:
        values = la.eigh(dense, eigvals_only=True, subset_by_index=[0, k - 1])
        levels = spectral_levels(values)
        if len(levels) > count or k == n:
            break
        k = min(n, 2 * k)
    if len(levels) < count:
        raise ValueError(f"operator has only {len(levels)} distinct levels, {count} requested")
    return levels


def lanczos(
    matrix: sp.spmatrix,
    k: int,
    seed: int = 0,
    deflate: np.ndarray | None = None,
    max_iter: int | None = None,
    tol: float = RITZ_TOL,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Lanczos with full reorthogonalization for the k lowest distinct levels.

    Returns (values, vectors, iterations). Iteration stops once every picked
    Ritz pair has residual bound beta_m |s_m| <= ``tol`` or the Krylov space
    is exhausted.
    """
    n = matrix.shape[0]
    rng = np.random.default_rng(seed)
    q = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    q = _project_out(q, deflate)
    q /= np.linalg.norm(q)

    available = n - (deflate.shape[1] if deflate is not None else 0)
    cap = min(max_iter or _DEFAULT_MAX_ITER, available)
    krylov = np.zeros((n, cap), dtype=complex)
    krylov[:, 0] = q
    alphas: list[float] = []
    betas: list[float] = []
    picked: list[int] | None = None
    theta = s = None

    for m in range(cap):
        w = _project_out(matrix @ krylov[:, m], deflate)
        alpha = float(np.vdot(krylov[:, m], w).real)
        alphas.append(alpha)
        w -= alpha * krylov[:, m]
        if m > 0:
            w -= betas[-1] * krylov[:, m - 1]
        basis = krylov[:, : m + 1]
        for _ in range(2):
            w -= basis @ (basis.conj().T @ w)
        w = _project_out(w, deflate)
        beta = float(np.linalg.norm(w))

        exhausted = beta < _BREAKDOWN_TOL or m + 1 == cap
        if exhausted or (m + 1 >= k and (m + 1) % _CHECK_EVERY == 0):
            theta, s = _tridiagonal_eigh(alphas, betas)
            bounds = beta * np.abs(s[-1, :])
            picked = _lowest_distinct(theta, bounds, k)
            if picked is not None and (exhausted or all(bounds[i] <= tol for i in picked)):
                break
        if exhausted:
            break
        betas.append(beta)
        krylov[:, m + 1] = w / beta

    iterations = len(alphas)
    if picked is None:
        raise EigensolverError(float("inf"), iterations)
    vectors = krylov[:, :iterations] @ s[:, picked]
    vectors /= np.linalg.norm(vectors, axis=0)
    logger.debug("lanczos: %d iterations, levels %s", iterations, theta[picked])
    return theta[picked], vectors, iterations


def _lanczos_levels(matrix: sp.spmatrix, k: int, seed: int, deflate: np.ndarray | None) -> EigenResult:
    values: list[float] = []
    columns: list[np.ndarray] = []
    if deflate is not None and deflate.shape[1]:
        z = deflate[:, 0]
        values.append(float(np.vdot(z, matrix @ z).real))
        columns.append(z)
        k -= 1
    iterations = 0
    if k > 0:
        theta, vecs, iterations = lanczos(matrix, k, seed, deflate)
        values.extend(float(t) for t in theta)
        columns.extend(vecs[:, i] for i in range(vecs.shape[1]))

    vals = np.array(values)
    vecs = np.stack(columns, axis=1)
    residuals = _residuals(matrix, vals, vecs)
    worst = float(np.max(residuals))
    if worst > RESIDUAL_TOL:
        raise EigensolverError(worst, iterations)
    return EigenResult(vals, vecs, "lanczos", residuals)


def _tridiagonal_eigh(alphas: list[float], betas: list[float]) -> tuple[np.ndarray, np.ndarray]:
    if len(alphas) == 1:
        return np.array(alphas), np.ones((1, 1))
    return la.eigh_tridiagonal(np.array(alphas), np.array(betas[: len(alphas) - 1]))


def _lowest_distinct(theta: np.ndarray, bounds: np.ndarray, k: int) -> list[int] | None:
    """Index of the best-converged Ritz value in each of the k lowest groups."""
    groups: list[list[int]] = []
    for i in np.argsort(theta):
        if groups and theta[i] - theta[groups[-1][-1]] <= DEGENERACY_TOL:
            groups[-1].append(int(i))
        else:
            groups.append([int(i)])
    if len(groups) < k:
        return None
    return [min(g, key=lambda i: bounds[i]) for g in groups[:k]]


def _project_out(v: np.ndarray, deflate: np.ndarray | None) -> np.ndarray:
    if deflate is None or deflate.shape[1] == 0:
        return v
    return v - deflate @ (deflate.conj().T @ v)


def _residuals(matrix: sp.spmatrix, values: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    r = matrix @ vectors - vectors * values[None, :]
    return np.linalg.norm(r, axis=0)
