from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import pytest

from mnemosim.core import parse_scenario

GOLDEN = Path(__file__).parent / "golden"

_acceptance: dict[int, tuple[str, str]] = {}


def scenario_path(name: str) -> Path:
    return Path(str(resources.files("mnemosim") / "scenarios" / name))


def scenario_dict(name: str) -> dict:
    return json.loads(scenario_path(name).read_text(encoding="utf-8"))


def make_config(**doc):
    """A parsed scenario from keyword sections; propositions default to P1, P2."""
    doc.setdefault(
        "propositions",
        [
            {"id": "P1", "decay_constant": 0.5, "base_latency": 2.0},
            {"id": "P2", "decay_constant": 0.5, "base_latency": 2.0},
        ],
    )
    return parse_scenario(doc)


@pytest.fixture
def acceptance_record():
    """Record one acceptance criterion's verdict for the terminal summary."""

    def record(number: int, name: str, passed: bool) -> None:
        _acceptance[number] = (name, "PASS" if passed else "FAIL")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance):
        name, verdict = _acceptance[number]
        terminalreporter.write_line(f"criterion {number:2d} {verdict}  {name}")
