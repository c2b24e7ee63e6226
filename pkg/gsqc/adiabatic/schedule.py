"""Adiabatic schedules lambda(s), s = t / T in [0, 1]."""
from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.integrate import cumulative_trapezoid

from ..spectral.gaps import GapProfile

ENDPOINT_TOL = 1e-12
GAP_ADAPTED_RESOLUTION = 4001


class ScheduleError(ValueError):
    """Raised when a schedule cannot be built from its inputs."""


class ScheduleKind(Enum):
    LINEAR = "linear"
    GAP_ADAPTED = "gap-adapted"
    USER_TABLE = "user-table"

    @classmethod
    def parse(cls, value: str | ScheduleKind) -> ScheduleKind:
        if isinstance(value, ScheduleKind):
            return value
        key = value.strip().lower().replace("_", "-")
        for kind in cls:
            if kind.value == key:
                return kind
        raise ScheduleError(f"unknown schedule '{value}' (valid: {', '.join(k.value for k in cls)})")


@dataclass(frozen=True, eq=False)
class Schedule:
    """Piecewise-linear lambda(s) through (s_grid, lam_grid) over total time T."""
    kind: ScheduleKind
    total_time: float
    s_grid: np.ndarray
    lam_grid: np.ndarray

    def lam(self, s: float | np.ndarray) -> float | np.ndarray:
        out = np.interp(s, self.s_grid, self.lam_grid)
        return float(out) if np.ndim(out) == 0 else out

    def lam_at_time(self, t: float) -> float:
        if self.total_time == 0:
            return self.lam(1.0)
        return self.lam(min(max(t / self.total_time, 0.0), 1.0))

    def slope(self, s: float | np.ndarray) -> float | np.ndarray:
        """d lambda / d s (segment slope, right-continuous)."""
        ds = np.diff(self.s_grid)
        slopes = np.diff(self.lam_grid) / ds
        idx = np.clip(np.searchsorted(self.s_grid, s, side="right") - 1, 0, slopes.size - 1)
        out = slopes[idx]
        return float(out) if np.ndim(out) == 0 else out


def make_schedule(
    kind: str | ScheduleKind,
    total_time: float,
    gap_profile: GapProfile | None = None,
    table: Sequence[tuple[float, float]] | None = None,
) -> Schedule:
    """Build a schedule.

    linear: lambda(s) = s. gap-adapted: d lambda / ds proportional to gap^2,
    so the run slows down where the gap closes. user-table: the given
    (s, lambda) points, linearly interpolated.
    """
    kind = ScheduleKind.parse(kind)
    total_time = float(total_time)
    if not total_time >= 0 or not np.isfinite(total_time):
        raise ScheduleError(f"total time must be finite and >= 0, got {total_time}")

    if kind is ScheduleKind.LINEAR:
        return Schedule(kind, total_time, np.array([0.0, 1.0]), np.array([0.0, 1.0]))
    if kind is ScheduleKind.GAP_ADAPTED:
        if gap_profile is None:
            raise ScheduleError("gap-adapted schedule needs a gap profile")
        s_grid, lam_grid = _gap_adapted_grid(gap_profile)
        return Schedule(kind, total_time, s_grid, lam_grid)
    if table is None:
        raise ScheduleError("user-table schedule needs a table of (s, lambda) points")
    s_grid, lam_grid = _validated_table(table)
    return Schedule(kind, total_time, s_grid, lam_grid)


def _gap_adapted_grid(profile: GapProfile) -> tuple[np.ndarray, np.ndarray]:
    lams = profile.lambdas
    if lams.size < 2 or lams[0] > ENDPOINT_TOL or lams[-1] < 1 - ENDPOINT_TOL:
        raise ScheduleError("gap profile must cover lambda in [0, 1]")
    lam_grid = np.linspace(0.0, 1.0, GAP_ADAPTED_RESOLUTION)
    gaps = np.asarray(profile.gap_at(lam_grid))
    if np.any(gaps <= 0):
        raise ScheduleError("gap profile closes (gap <= 0); cannot pace a gap-adapted schedule")
    s = cumulative_trapezoid(1.0 / gaps**2, lam_grid, initial=0.0)
    return s / s[-1], lam_grid


def _validated_table(table: Sequence[tuple[float, float]]) -> tuple[np.ndarray, np.ndarray]:
    points = np.asarray(table, dtype=float)
    if points.ndim != 2 or points.shape[1] != 2 or points.shape[0] < 2:
        raise ScheduleError("schedule table must hold at least two (s, lambda) pairs")
    s, lam = points[:, 0], points[:, 1]
    errors: list[str] = []
    if abs(s[0]) > ENDPOINT_TOL or abs(lam[0]) > ENDPOINT_TOL:
        errors.append(f"table must start at (0, 0), got ({s[0]}, {lam[0]})")
    if abs(s[-1] - 1) > ENDPOINT_TOL or abs(lam[-1] - 1) > ENDPOINT_TOL:
        errors.append(f"table must end at (1, 1), got ({s[-1]}, {lam[-1]})")
    if np.any(np.diff(s) <= 0):
        errors.append("s values must be strictly increasing")
    if np.any(np.diff(lam) < 0):
        errors.append("lambda values must be nondecreasing")
    if errors:
        raise ScheduleError("; ".join(errors))
    s[0], lam[0], s[-1], lam[-1] = 0.0, 0.0, 1.0, 1.0
    return s, lam
