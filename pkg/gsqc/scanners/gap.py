from __future__ import annotations

import numpy as np

from ..circuit.ir import Circuit
from ..core.models import Fact
from ..spectral.gaps import gap_scan

DEFAULT_POINTS = 21


class GapScanner:
    """Coarse gap scan over lambda in [0, 1]."""

    name = "gap"

    def __init__(self, method: str = "dense", points: int = DEFAULT_POINTS, workers: int = 1,
                 seed: int | None = None) -> None:
        self._method = method
        self._points = points
        self._workers = workers
        self._seed = seed

    def scan(self, circuit: Circuit) -> tuple[list[Fact], list[str]]:
        grid = np.linspace(0.0, 1.0, self._points)
        profile = gap_scan(circuit, grid, refine=False, method=self._method,
                           workers=self._workers, seed=self._seed)
        source = f"{self.name}:{self._method}"
        return [
            Fact("gap.min", profile.min_gap, source),
            Fact("gap.lambda_star", profile.lambda_star, source),
        ], list(profile.warnings)
