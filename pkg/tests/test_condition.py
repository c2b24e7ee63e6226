import pytest

from gsqc.core.condition import evaluate_condition, validate_condition

RESIDUAL_CONDITION = {
    "any": [
        {"fact": "ground_state.residual", "op": "gt", "value": 1.0e-10},
        {"fact": "operator.hermiticity_error", "op": "gt", "value": 1.0e-12},
    ]
}


# --- evaluate_condition ---

def test_triggers_on_large_residual():
    facts = {"ground_state.residual": 1e-3, "operator.hermiticity_error": 0.0}
    assert evaluate_condition(RESIDUAL_CONDITION, facts) is True


def test_triggers_on_non_hermitian_operator():
    facts = {"ground_state.residual": 1e-14, "operator.hermiticity_error": 0.5}
    assert evaluate_condition(RESIDUAL_CONDITION, facts) is True


def test_no_trigger_at_rounding_level():
    facts = {"ground_state.residual": 3e-15, "operator.hermiticity_error": 0.0}
    assert evaluate_condition(RESIDUAL_CONDITION, facts) is False


def test_all_condition():
    condition = {
        "all": [
            {"fact": "gap.min", "op": "lt", "value": 0.1},
            {"fact": "gap.lambda_star", "op": "ge", "value": 0.5},
        ]
    }
    assert evaluate_condition(condition, {"gap.min": 0.05, "gap.lambda_star": 0.9}) is True
    assert evaluate_condition(condition, {"gap.min": 0.05, "gap.lambda_star": 0.2}) is False


@pytest.mark.parametrize("op, value, expected", [
    ("lt", 1.0, False),
    ("le", 1.0, True),
    ("gt", 0.5, True),
    ("ge", 2.0, False),
    ("eq", 1.0, True),
])
def test_comparison_operators(op, value, expected):
    condition = {"fact": "x", "op": op, "value": value}
    assert evaluate_condition(condition, {"x": 1.0}) is expected


def test_in_operator():
    condition = {"fact": "method", "op": "in", "value": ["dense", "lanczos"]}
    assert evaluate_condition(condition, {"method": "lanczos"}) is True
    assert evaluate_condition(condition, {"method": "power"}) is False


def test_missing_fact_returns_false():
    assert evaluate_condition(RESIDUAL_CONDITION, {}) is False


def test_comparison_on_non_numeric_fact_is_false():
    condition = {"fact": "gap.min", "op": "le", "value": 0.0}
    assert evaluate_condition(condition, {"gap.min": "n/a"}) is False
    assert evaluate_condition(condition, {"gap.min": False}) is False


def test_fact_present_but_none_still_evaluates():
    condition = {"fact": "x", "op": "eq", "value": None}
    assert evaluate_condition(condition, {"x": None}) is True


# --- validate_condition ---

def test_validate_valid_condition():
    assert validate_condition(RESIDUAL_CONDITION) == []


def test_validate_missing_fact_key():
    errors = validate_condition({"op": "eq", "value": True})
    assert any("missing required key 'fact'" in e for e in errors)


def test_validate_unknown_operator():
    errors = validate_condition({"fact": "x", "op": "regex", "value": ".*"})
    assert any("unknown operator" in e for e in errors)


def test_validate_in_with_non_list_value():
    errors = validate_condition({"fact": "x", "op": "in", "value": "not-a-list"})
    assert any("requires a list value" in e for e in errors)


@pytest.mark.parametrize("value", ["small", True, None])
def test_validate_comparison_needs_number(value):
    errors = validate_condition({"fact": "x", "op": "gt", "value": value})
    assert any("requires a numeric value" in e for e in errors)


def test_validate_empty_branch():
    errors = validate_condition({"any": []})
    assert any("non-empty list" in e for e in errors)


def test_validate_nested_error():
    condition = {"all": [{"any": [{"fact": "x", "op": "bad", "value": 1}]}]}
    errors = validate_condition(condition)
    assert any("unknown operator" in e for e in errors)
    assert any("all[0].any[0]" in e for e in errors)
