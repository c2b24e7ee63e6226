"""Spectral gap scans of H(lambda) and minimum-gap sweeps over circuit families."""
from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.stats import linregress

from ..circuit.ir import Circuit
from ..circuit.parser import circuit_hash
from ..compiler.basis import BasisIndex, check_lambda, ground_space
from ..compiler.hamiltonian import HamiltonianFamily
from .eigensolve import METHODS, EigensolverError, lowest_levels

logger = logging.getLogger(__name__)

REFINE_XATOL = 1e-6


def min_grid_points(refine: bool) -> int:
    return 3 if refine else 2


class GridError(ValueError):
    """Raised when a lambda grid has too few distinct points."""


class GapScanError(RuntimeError):
    """Raised when the eigensolve at one grid point fails."""

    def __init__(self, lam: float, cause: Exception) -> None:
        self.lam = lam
        self.cause = cause
        super().__init__(f"eigensolve failed at lambda={lam:.6g}: {cause}")


@dataclass(frozen=True)
class GapSample:
    s: float
    lam: float
    e0: float
    e1: float
    refined: bool = False

    @property
    def gap(self) -> float:
        return self.e1 - self.e0


@dataclass
class GapProfile:
    samples: list[GapSample]
    min_gap: float
    lambda_star: float
    s_star: float
    method: str
    refined: bool = False
    circuit_name: str = ""
    warnings: list[str] = field(default_factory=list)

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([x.lam for x in self.samples])

    @property
    def gaps(self) -> np.ndarray:
        return np.array([x.gap for x in self.samples])

    def gap_at(self, lam: float | np.ndarray) -> float | np.ndarray:
        """Linear interpolation of the sampled gap curve."""
        return np.interp(lam, self.lambdas, self.gaps)

    def lipschitz_constant(self) -> float:
        """Largest |delta gap / delta lambda| between adjacent samples."""
        lams, gaps = self.lambdas, self.gaps
        if lams.size < 2:
            return 0.0
        dl = np.diff(lams)
        keep = dl > 0
        if not keep.any():
            return 0.0
        return float(np.max(np.abs(np.diff(gaps)[keep] / dl[keep])))


@dataclass(frozen=True)
class FamilyRow:
    num_steps: int
    inv_n2: float
    min_gap: float
    lambda_star: float


@dataclass
class FamilySweep:
    rows: list[FamilyRow]
    slope: float
    intercept: float
    r_squared: float
    warnings: list[str] = field(default_factory=list)


def default_seed(circuit: Circuit) -> int:
    return int(circuit_hash(circuit)[:16], 16)


def gap_scan(
    circuit: Circuit,
    grid: Sequence[float],
    refine: bool = True,
    method: str = "dense",
    workers: int = 1,
    seed: int | None = None,
    family: HamiltonianFamily | None = None,
) -> GapProfile:
    """E0, E1 and gap over a lambda grid, with optional bounded refinement.

    Refinement brackets the coarse minimum by its grid neighbours and runs a
    bounded Brent search; if it does not improve on the grid value the grid
    minimum is kept and a warning is recorded.
    """
    lams = sorted({check_lambda(x) for x in grid})
    needed = min_grid_points(refine)
    if len(lams) < needed:
        raise GridError(
            f"gap scan needs at least {needed} distinct grid points"
            f"{' when refining' if refine else ''}, got {len(lams)}"
        )
    if method not in METHODS:
        raise ValueError(f"unknown method '{method}' (valid: {', '.join(METHODS)})")

    basis = BasisIndex.for_circuit(circuit)
    family = family or HamiltonianFamily.from_circuit(circuit, basis)
    seed = default_seed(circuit) if seed is None else seed

    def levels(lam: float) -> tuple[float, float]:
        deflate = ground_space(circuit, lam, basis) if method == "lanczos" else None
        try:
            e = lowest_levels(family.at(lam), 2, method, seed, deflate)
        except (EigensolverError, np.linalg.LinAlgError) as exc:
            raise GapScanError(lam, exc) from exc
        return float(e[0]), float(e[1])

    def gap_of(lam: float) -> float:
        e0, e1 = levels(float(lam))
        return e1 - e0

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        energies = list(pool.map(levels, lams))
    samples = [GapSample(lam, lam, e0, e1) for lam, (e0, e1) in zip(lams, energies)]

    best = min(range(len(samples)), key=lambda i: samples[i].gap)
    warnings: list[str] = []
    refined = False
    if refine:
        lo = lams[max(best - 1, 0)]
        hi = lams[min(best + 1, len(lams) - 1)]
        result = minimize_scalar(
            gap_of,
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": REFINE_XATOL},
        )
        lam_r = float(result.x)
        if result.success and result.fun < samples[best].gap:
            e0, e1 = levels(lam_r)
            samples.append(GapSample(lam_r, lam_r, e0, e1, refined=True))
            samples.sort(key=lambda x: x.lam)
            refined = True
        else:
            warnings.append(
                f"refinement in [{lo:.6g}, {hi:.6g}] did not improve on the grid minimum; "
                f"using lambda={samples[best].lam:.6g}"
            )

    star = min(samples, key=lambda x: x.gap)
    logger.debug("gap scan %s: min gap %.6g at lambda %.6g", circuit.name, star.gap, star.lam)
    return GapProfile(
        samples=samples,
        min_gap=star.gap,
        lambda_star=star.lam,
        s_star=star.s,
        method=method,
        refined=refined,
        circuit_name=circuit.name,
        warnings=warnings,
    )


def gap_family_sweep(
    family: Callable[[int], Circuit],
    n_values: Sequence[int],
    grid: Sequence[float],
    refine: bool = True,
    method: str = "dense",
    workers: int = 1,
    seed: int | None = None,
) -> FamilySweep:
    """Minimum gap for each N and a least-squares fit of gap against 1/N^2."""
    rows: list[FamilyRow] = []
    warnings: list[str] = []
    for n in n_values:
        profile = gap_scan(family(n), grid, refine=refine, method=method, workers=workers, seed=seed)
        rows.append(FamilyRow(n, 1.0 / n**2, profile.min_gap, profile.lambda_star))
        warnings.extend(f"N={n}: {w}" for w in profile.warnings)

    if len(rows) >= 2:
        fit = linregress([r.inv_n2 for r in rows], [r.min_gap for r in rows])
        slope, intercept, r_squared = float(fit.slope), float(fit.intercept), float(fit.rvalue**2)
    else:
        slope = intercept = r_squared = float("nan")
        warnings.append("fewer than two family members; no fit")
    return FamilySweep(rows, slope, intercept, r_squared, warnings)
