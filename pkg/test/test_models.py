import json

import pytest

from bpbv_engine.models import FAIL, PASS, UNDECIDED, CheckOutcome, CheckRecord, Report


def _report(*statuses):
    checks = [CheckRecord(name=f"check {i}", status=status) for i, status in enumerate(statuses)]
    return Report(params={"command": "alpha", "p": 2}, checks=checks, outputs={"degree": 4})


def test_overall_status_precedence():
    assert _report(PASS, PASS).overall_status == PASS
    assert _report(PASS, UNDECIDED).overall_status == UNDECIDED
    assert _report(UNDECIDED, FAIL, PASS).overall_status == FAIL
    assert _report().overall_status == PASS
    assert not _report(PASS, UNDECIDED).passed


def test_unknown_status_rejected():
    with pytest.raises(ValueError):
        CheckRecord(name="x", status="MAYBE")


def test_outcome_passed():
    assert CheckOutcome("x", PASS).passed
    assert not CheckOutcome("x", UNDECIDED, "cutoff 4").passed


def test_report_schema():
    document = json.loads(_report(PASS).to_json())
    assert set(document) == {"params", "checks", "outputs", "status"}
    assert document["checks"][0] == {
        "name": "check 0",
        "status": PASS,
        "certificate": None,
        "detail": "",
        "timing_ms": 0,
    }
    assert document["status"] == PASS


def test_json_is_deterministic():
    first = Report(params={"p": 2, "command": "alpha"}, outputs={"b": (1, 2), "a": "x0^2"})
    second = Report(params={"command": "alpha", "p": 2}, outputs={"a": "x0^2", "b": [1, 2]})
    assert first.to_json() == second.to_json()
    assert first.to_json().endswith("}\n")
