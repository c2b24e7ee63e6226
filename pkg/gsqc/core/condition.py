from __future__ import annotations

import operator
from typing import Any

_COMPARISONS = {
    "lt": operator.lt,
    "le": operator.le,
    "gt": operator.gt,
    "ge": operator.ge,
}
_VALID_OPS = {"eq", "in", *_COMPARISONS}


def validate_condition(condition: dict) -> list[str]:
    """Return a list of error strings if the condition tree is malformed."""
    errors: list[str] = []
    _validate_node(condition, errors, path="condition")
    return errors


def _validate_node(node: dict, errors: list[str], path: str) -> None:
    if not isinstance(node, dict):
        errors.append(f"{path}: expected dict, got {type(node).__name__}")
        return

    for branch in ("all", "any"):
        if branch in node:
            children = node[branch]
            if not isinstance(children, list) or not children:
                errors.append(f"{path}.{branch}: expected a non-empty list")
                return
            for i, child in enumerate(children):
                _validate_node(child, errors, path=f"{path}.{branch}[{i}]")
            return

    for key in ("fact", "op", "value"):
        if key not in node:
            errors.append(f"{path}: missing required key '{key}'")
    op = node.get("op")
    if op is not None and op not in _VALID_OPS:
        errors.append(f"{path}: unknown operator '{op}' (valid: {', '.join(sorted(_VALID_OPS))})")
    value = node.get("value")
    if op == "in" and value is not None and not isinstance(value, (list, tuple, set)):
        errors.append(f"{path}: 'in' operator requires a list value, got {type(value).__name__}")
    if op in _COMPARISONS and (isinstance(value, bool) or not isinstance(value, (int, float))):
        errors.append(f"{path}: '{op}' operator requires a numeric value, got {type(value).__name__}")


def evaluate_condition(condition: dict, facts: dict[str, Any]) -> bool:
    """Evaluate an all/any condition tree against a flat fact map.

    A missing fact, or a non-numeric fact under a comparison, makes the leaf False.
    """
    if "all" in condition:
        return all(evaluate_condition(c, facts) for c in condition["all"])
    if "any" in condition:
        return any(evaluate_condition(c, facts) for c in condition["any"])

    key = condition["fact"]
    op = condition["op"]
    expected = condition["value"]
    if key not in facts:
        return False
    actual = facts[key]

    if op == "eq":
        return actual == expected
    if op == "in":
        return actual in expected
    if op in _COMPARISONS:
        if isinstance(actual, bool) or not isinstance(actual, (int, float)):
            return False
        return _COMPARISONS[op](actual, expected)

    raise ValueError(f"Unknown operator: {op}")
