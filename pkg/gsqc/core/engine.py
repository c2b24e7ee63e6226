from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .condition import evaluate_condition, validate_condition
from .models import Fact, Finding

_REQUIRED_CHECK_KEYS = {"id", "title", "severity", "condition"}
_SEVERITIES = {"error", "warning"}

DEFAULT_CHECKS = Path(__file__).resolve().parent.parent / "checks" / "verify.yaml"


@dataclass
class EvalResult:
    """Result of evaluating checks: findings + any warnings produced."""
    findings: list[Finding]
    warnings: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.findings


class CheckLoadError(Exception):
    """Raised when a check file is malformed."""


class CheckEngine:
    """Loads YAML verification checks and evaluates them against measured facts.

    Each check describes its failure condition; a check whose condition holds
    becomes a Finding.
    """

    def __init__(self, checks_path: Path = DEFAULT_CHECKS) -> None:
        try:
            with open(checks_path) as f:
                document = yaml.safe_load(f)
        except yaml.YAMLError as exc:
            raise CheckLoadError(f"{checks_path}: invalid YAML: {exc}") from exc

        if not isinstance(document, dict):
            raise CheckLoadError(f"{checks_path}: expected a YAML mapping at top level")

        checks = document.get("checks", [])
        if not isinstance(checks, list):
            raise CheckLoadError(f"{checks_path}: 'checks' must be a list")

        errors = _validate_checks(checks)
        if errors:
            joined = "\n  ".join(errors)
            raise CheckLoadError(f"{checks_path}: check validation failed:\n  {joined}")

        self.path = Path(checks_path)
        self._checks: list[dict] = checks

    @property
    def check_ids(self) -> list[str]:
        return [c["id"] for c in self._checks]

    def evaluate(self, facts: list[Fact]) -> EvalResult:
        fact_map, collisions = _build_fact_map(facts)
        warnings = [
            f"fact '{key}' collected {len(sources)} times "
            f"(sources: {', '.join(sources)}), using last value"
            for key, sources in collisions.items()
        ]

        findings: list[Finding] = []
        for check in self._checks:
            fact_keys = _extract_fact_keys(check["condition"])
            if not fact_keys & fact_map.keys():
                warnings.append(f"check '{check['id']}' skipped: no facts collected for {sorted(fact_keys)}")
                continue
            if evaluate_condition(check["condition"], fact_map):
                findings.append(Finding(
                    check_id=check["id"],
                    title=check["title"],
                    severity=check["severity"],
                    evidence=[f for f in facts if f.key in fact_keys],
                    hint=check.get("hint", ""),
                ))

        return EvalResult(findings=findings, warnings=warnings)


def _build_fact_map(facts: list[Fact]) -> tuple[dict, dict[str, list[str]]]:
    """Build a flat fact map. Return (map, collisions).

    collisions maps duplicate keys to their list of sources.
    """
    fact_map: dict = {}
    sources: dict[str, list[str]] = {}
    for f in facts:
        sources.setdefault(f.key, []).append(f.source)
        fact_map[f.key] = f.value
    collisions = {k: v for k, v in sources.items() if len(v) > 1}
    return fact_map, collisions


def _extract_fact_keys(condition: dict) -> set[str]:
    keys: set[str] = set()
    for branch in ("all", "any"):
        if branch in condition:
            for c in condition[branch]:
                keys |= _extract_fact_keys(c)
            return keys
    if "fact" in condition:
        keys.add(condition["fact"])
    return keys


def _validate_checks(checks: list) -> list[str]:
    errors: list[str] = []
    seen: set[str] = set()
    for i, check in enumerate(checks):
        if not isinstance(check, dict):
            errors.append(f"checks[{i}]: expected dict, got {type(check).__name__}")
            continue
        label = f"checks[{i}] (id={check.get('id', '?')})"
        missing = _REQUIRED_CHECK_KEYS - check.keys()
        if missing:
            errors.append(f"{label}: missing keys: {sorted(missing)}")
        if check.get("id") in seen:
            errors.append(f"{label}: duplicate id")
        seen.add(check.get("id"))
        if "severity" in check and check["severity"] not in _SEVERITIES:
            errors.append(f"{label}: severity must be one of {sorted(_SEVERITIES)}")
        if "condition" in check:
            errors.extend(f"{label}: {err}" for err in validate_condition(check["condition"]))
    return errors
