from __future__ import annotations

from datetime import date
from pathlib import Path

import pytest

from policylint.document import ingest_text
from policylint.rules import compile_rules, load_rules_file

FIXTURES = Path(__file__).parent / "fixtures"

AS_OF = date(2026, 1, 15)


@pytest.fixture(scope="session")
def rule_policy_text() -> str:
    return (FIXTURES / "policy_rules.txt").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def rule_policy_doc(rule_policy_text):
    return ingest_text(rule_policy_text, "en", "FR")


@pytest.fixture(scope="session")
def fixture_rules():
    return load_rules_file(FIXTURES / "rules_fixture.jsonl")


@pytest.fixture(scope="session")
def fixture_ruleset(fixture_rules):
    return compile_rules(fixture_rules)


@pytest.fixture(scope="session")
def complete_policy_text() -> str:
    return (FIXTURES / "policy_complete.txt").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def issue8_policy_text() -> str:
    return (FIXTURES / "policy_issue8.txt").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def issue8_rules():
    return load_rules_file(FIXTURES / "rules_issue8.jsonl")


# --- acceptance summary ------------------------------------------------------
# One pass/fail line per acceptance criterion at the end of the run.

_acceptance_results: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if "test_acceptance" in report.nodeid and report.when == "call":
        name = report.nodeid.split("::", 1)[-1]
        _acceptance_results.append((name, report.outcome.upper()))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance_results:
        mark = "PASS" if outcome == "PASSED" else outcome
        terminalreporter.write_line(f"{mark:8s} {name}")
