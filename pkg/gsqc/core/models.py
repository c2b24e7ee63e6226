from __future__ import annotations

from dataclasses import dataclass
from typing import Any


@dataclass
class Fact:
    """A measured quantity, e.g. ``ground_state.residual``, and the scanner that produced it."""
    key: str
    value: Any
    source: str


@dataclass
class Finding:
    """A check whose failure condition held."""
    check_id: str
    title: str
    severity: str
    evidence: list[Fact]
    hint: str = ""
