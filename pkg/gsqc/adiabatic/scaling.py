"""Running time needed to reach a target fidelity, and its growth with N."""
from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import linregress

from ..circuit.ir import Circuit
from ..compiler.hamiltonian import HamiltonianFamily
from ..spectral.gaps import GapProfile, gap_scan
from .evolve import evolve
from .schedule import ScheduleKind, make_schedule

logger = logging.getLogger(__name__)

DEFAULT_GRID = tuple(np.linspace(0.0, 1.0, 41))
DEFAULT_REL_TOL = 0.02
MAX_DOUBLINGS = 30
MAX_BISECTIONS = 60


class BisectionError(RuntimeError):
    """Raised when the running-time search exceeds its iteration cap."""

    def __init__(self, bracket: tuple[float, float], message: str) -> None:
        self.bracket = bracket
        super().__init__(f"{message} (bracket [{bracket[0]:.6g}, {bracket[1]:.6g}])")


@dataclass(frozen=True)
class RequiredTime:
    total_time: float
    final_fidelity: float
    min_gap: float
    evaluations: int


@dataclass(frozen=True)
class ScalingRow:
    num_steps: int
    required_time: float
    final_fidelity: float
    min_gap: float


@dataclass
class ScalingResult:
    rows: list[ScalingRow]
    exponent: float
    prefactor: float
    r_squared: float


def required_time(
    circuit: Circuit,
    target_fidelity: float,
    schedule: str | ScheduleKind = ScheduleKind.GAP_ADAPTED,
    profile: GapProfile | None = None,
    dt: float | None = None,
    rel_tol: float = DEFAULT_REL_TOL,
) -> RequiredTime:
    """Smallest T (to ``rel_tol``) whose final fidelity reaches the target.

    The bracket starts at 1/min_gap and doubles until the target is met, then
    bisects.
    """
    if not 0 < target_fidelity < 1:
        raise ValueError(f"target fidelity must lie in (0, 1), got {target_fidelity}")
    kind = ScheduleKind.parse(schedule)
    profile = profile or gap_scan(circuit, DEFAULT_GRID, refine=True)
    family = HamiltonianFamily.from_circuit(circuit)
    evaluations = 0

    def fidelity(total: float) -> float:
        nonlocal evaluations
        evaluations += 1
        sched = make_schedule(kind, total, gap_profile=profile)
        return evolve(circuit, sched, dt=dt, family=family).final_fidelity

    fid_zero = fidelity(0.0)
    if fid_zero >= target_fidelity:
        return RequiredTime(0.0, fid_zero, profile.min_gap, evaluations)

    lo, hi = 0.0, 1.0 / profile.min_gap
    fid_hi = fidelity(hi)
    doublings = 0
    while fid_hi < target_fidelity:
        doublings += 1
        if doublings > MAX_DOUBLINGS:
            raise BisectionError((lo, hi), f"target fidelity {target_fidelity} not reached")
        lo, hi = hi, 2 * hi
        fid_hi = fidelity(hi)

    for _ in range(MAX_BISECTIONS):
        if hi - lo <= rel_tol * hi:
            break
        mid = 0.5 * (lo + hi)
        fid_mid = fidelity(mid)
        if fid_mid >= target_fidelity:
            hi, fid_hi = mid, fid_mid
        else:
            lo = mid
    else:
        raise BisectionError((lo, hi), "bisection did not converge")

    logger.debug("required T=%.4g for %s (%d evolutions)", hi, circuit.name, evaluations)
    return RequiredTime(hi, fid_hi, profile.min_gap, evaluations)


def running_time_scaling(
    family: Callable[[int], Circuit],
    n_values: Sequence[int],
    target_fidelity: float,
    schedule: str | ScheduleKind = ScheduleKind.GAP_ADAPTED,
    dt: float | None = None,
    rel_tol: float = DEFAULT_REL_TOL,
    workers: int = 1,
) -> ScalingResult:
    """Required T per N and the fitted exponent of T ~ N^k (log-log least squares)."""

    def run(n: int) -> ScalingRow:
        found = required_time(family(n), target_fidelity, schedule, dt=dt, rel_tol=rel_tol)
        return ScalingRow(n, found.total_time, found.final_fidelity, found.min_gap)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        rows = list(pool.map(run, n_values))

    usable = [r for r in rows if r.required_time > 0]
    if len(usable) >= 2:
        fit = linregress(
            [math.log(r.num_steps) for r in usable],
            [math.log(r.required_time) for r in usable],
        )
        exponent, prefactor, r_squared = float(fit.slope), math.exp(fit.intercept), float(fit.rvalue**2)
    else:
        exponent = prefactor = r_squared = float("nan")
    return ScalingResult(rows, exponent, prefactor, r_squared)
