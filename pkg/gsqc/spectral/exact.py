"""Closed-form single-qubit spectrum and its characteristic-polynomial recursion.

Energies are scaled, E_bar = E / energy scale.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from ..compiler.basis import check_lambda

DEGENERACY_TOL = 1e-8

_NEWTON_STEPS = 8


@dataclass(frozen=True)
class SpectrumExact:
    num_steps: int
    lam: float
    levels: tuple[float, ...]

    @property
    def gap(self) -> float:
        return self.levels[1] - self.levels[0]


def exact_single_qubit_spectrum(num_steps: int, lam: float, energy_scale: float = 1.0) -> SpectrumExact:
    """E_0 = 0 and E_n = (1 - lam)^2 + 2 lam (1 - cos(pi n / (N + 1))), n = 1..N.

    Each level is doubly degenerate in the 2(N+1)-dimensional chain space.
    """
    if num_steps < 1:
        raise ValueError(f"num_steps must be >= 1, got {num_steps}")
    lam = check_lambda(lam)
    n = np.arange(1, num_steps + 1)
    excited = (1 - lam) ** 2 + 2 * lam * (1 - np.cos(np.pi * n / (num_steps + 1)))
    levels = (0.0, *(float(energy_scale * e) for e in excited))
    return SpectrumExact(num_steps, lam, levels)


def single_qubit_min_gap(num_steps: int) -> tuple[float, float]:
    """(lambda*, minimum gap) = (cos(pi/(N+1)), sin^2(pi/(N+1)))."""
    theta = math.pi / (num_steps + 1)
    return math.cos(theta), math.sin(theta) ** 2


def determinant_recursion(num_steps: int, lam: float, e_bar: float) -> float:
    """D_{N+1} from D_{k+1} = (1 + lam^2 - E) D_k - lam^2 D_{k-1}.

    Base cases D_0 = 0 and D_1 = -E, so D_{N+1} = -E * t_N where t_N is the
    Chebyshev-type chain polynomial; its roots are exactly the closed-form
    spectrum.
    """
    if num_steps < 0:
        raise ValueError(f"num_steps must be >= 0, got {num_steps}")
    value, _ = _recursion_with_derivative(num_steps, lam, e_bar)
    return value


def determinant_polynomial(num_steps: int, lam: float) -> Polynomial:
    """D_{N+1} as a polynomial in E_bar."""
    lam2 = lam * lam
    e = Polynomial([0.0, 1.0])
    prev, cur = Polynomial([0.0]), -e
    for _ in range(num_steps):
        prev, cur = cur, (1 + lam2 - e) * cur - lam2 * prev
    return cur


def determinant_roots(num_steps: int, lam: float) -> np.ndarray:
    """Sorted real roots of D_{N+1}, Newton-polished on the recursion."""
    lam = check_lambda(lam)
    if lam == 0.0:
        # D_{N+1} = -E (1 - E)^N
        return np.array([0.0] + [1.0] * num_steps)
    roots = np.sort(determinant_polynomial(num_steps, lam).roots().real)
    polished = []
    for r in roots:
        x = float(r)
        for _ in range(_NEWTON_STEPS):
            f, df = _recursion_with_derivative(num_steps, lam, x)
            if df == 0 or not math.isfinite(f / df):
                break
            step = f / df
            x -= step
            if abs(step) < 1e-15:
                break
        polished.append(x)
    return np.sort(np.array(polished))


def spectral_levels(values: np.ndarray, tol: float = DEGENERACY_TOL) -> list[tuple[float, int]]:
    """Group ascending eigenvalues into (level, multiplicity) pairs."""
    levels: list[tuple[float, int]] = []
    group: list[float] = []
    for v in np.sort(np.asarray(values, dtype=float)):
        if group and v - group[-1] > tol:
            levels.append((float(np.mean(group)), len(group)))
            group = []
        group.append(float(v))
    if group:
        levels.append((float(np.mean(group)), len(group)))
    return levels


def _recursion_with_derivative(num_steps: int, lam: float, e_bar: float) -> tuple[float, float]:
    lam2 = lam * lam
    a = 1 + lam2 - e_bar
    prev, cur = 0.0, -e_bar
    dprev, dcur = 0.0, -1.0
    for _ in range(num_steps):
        prev, cur, dprev, dcur = (
            cur,
            a * cur - lam2 * prev,
            dcur,
            -cur + a * dcur - lam2 * dprev,
        )
    return cur, dcur
