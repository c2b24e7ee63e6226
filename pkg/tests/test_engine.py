import pytest
import yaml

from gsqc.core.engine import DEFAULT_CHECKS, CheckEngine, CheckLoadError
from gsqc.core.models import Fact


def _healthy_facts() -> list[Fact]:
    return [
        Fact(key="ground_state.residual", value=2e-15, source="residual:bell"),
        Fact(key="operator.hermiticity_error", value=0.0, source="residual:bell"),
        Fact(key="readout.infidelity", value=1e-14, source="readout:bell"),
        Fact(key="readout.zero_space_dimension_matches", value=True, source="readout:bell"),
        Fact(key="gap.min", value=0.12, source="gap:bell"),
    ]


def _replace(facts: list[Fact], key: str, value) -> list[Fact]:
    return [Fact(f.key, value, f.source) if f.key == key else f for f in facts]


# --- evaluation ---

def test_default_checks_load():
    engine = CheckEngine()
    assert engine.path == DEFAULT_CHECKS
    assert engine.check_ids == ["residual", "readout", "gap"]


def test_healthy_facts_pass():
    result = CheckEngine().evaluate(_healthy_facts())
    assert result.passed
    assert result.findings == []
    assert result.warnings == []


def test_residual_finding():
    facts = _replace(_healthy_facts(), "ground_state.residual", 0.3)
    result = CheckEngine().evaluate(facts)
    assert [f.check_id for f in result.findings] == ["residual"]
    finding = result.findings[0]
    assert finding.severity == "error"
    assert "gsqc build" in finding.hint
    assert {f.key for f in finding.evidence} == {"ground_state.residual", "operator.hermiticity_error"}


def test_readout_finding_on_wrong_zero_space():
    facts = _replace(_healthy_facts(), "readout.zero_space_dimension_matches", False)
    result = CheckEngine().evaluate(facts)
    assert [f.check_id for f in result.findings] == ["readout"]


def test_gap_finding_on_closed_gap():
    facts = _replace(_healthy_facts(), "gap.min", 0.0)
    result = CheckEngine().evaluate(facts)
    assert [f.check_id for f in result.findings] == ["gap"]
    assert not result.passed


def test_every_check_fires_together():
    facts = _replace(_healthy_facts(), "ground_state.residual", 1.0)
    facts = _replace(facts, "readout.infidelity", 0.5)
    facts = _replace(facts, "gap.min", -1e-3)
    result = CheckEngine().evaluate(facts)
    assert {f.check_id for f in result.findings} == {"residual", "readout", "gap"}


def test_check_without_facts_is_skipped_with_warning():
    facts = [f for f in _healthy_facts() if not f.key.startswith("gap.")]
    result = CheckEngine().evaluate(facts)
    assert result.passed
    assert len(result.warnings) == 1
    assert "check 'gap' skipped" in result.warnings[0]


def test_duplicate_fact_warns_with_sources():
    facts = _healthy_facts() + [Fact(key="gap.min", value=0.2, source="gap:rerun")]
    result = CheckEngine().evaluate(facts)
    assert len(result.warnings) == 1
    assert "gap:bell" in result.warnings[0]
    assert "gap:rerun" in result.warnings[0]
    assert "2 times" in result.warnings[0]


def test_custom_check_file(tmp_path):
    checks = tmp_path / "strict.yaml"
    checks.write_text(yaml.dump({
        "checks": [{
            "id": "tight-gap", "title": "gap below 0.2", "severity": "warning",
            "condition": {"fact": "gap.min", "op": "lt", "value": 0.2},
        }]
    }))
    result = CheckEngine(checks).evaluate(_healthy_facts())
    assert [f.check_id for f in result.findings] == ["tight-gap"]
    assert result.findings[0].severity == "warning"


# --- validation ---

def test_rejects_check_missing_keys(tmp_path):
    checks = tmp_path / "bad.yaml"
    checks.write_text(yaml.dump({"checks": [{"id": "X"}]}))
    with pytest.raises(CheckLoadError, match="missing keys"):
        CheckEngine(checks)


def test_rejects_check_with_bad_condition(tmp_path):
    checks = tmp_path / "bad.yaml"
    checks.write_text(yaml.dump({
        "checks": [{
            "id": "X", "title": "x", "severity": "error",
            "condition": {"fact": "x", "op": "nope", "value": 1},
        }]
    }))
    with pytest.raises(CheckLoadError, match="unknown operator"):
        CheckEngine(checks)


def test_rejects_duplicate_ids_and_bad_severity(tmp_path):
    check = {"id": "X", "title": "x", "severity": "critical",
             "condition": {"fact": "x", "op": "eq", "value": 1}}
    checks = tmp_path / "bad.yaml"
    checks.write_text(yaml.dump({"checks": [check, check]}))
    with pytest.raises(CheckLoadError) as exc:
        CheckEngine(checks)
    assert "duplicate id" in str(exc.value)
    assert "severity must be one of" in str(exc.value)


def test_rejects_non_dict_document(tmp_path):
    checks = tmp_path / "bad.yaml"
    checks.write_text("just a string")
    with pytest.raises(CheckLoadError, match="expected a YAML mapping"):
        CheckEngine(checks)


def test_rejects_invalid_yaml(tmp_path):
    checks = tmp_path / "bad.yaml"
    checks.write_text("checks: [unclosed")
    with pytest.raises(CheckLoadError, match="invalid YAML"):
        CheckEngine(checks)
