from __future__ import annotations

import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "qfc", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile("qfc")

ACCEPTANCE: dict[int, list[tuple[bool, str]]] = {}


@pytest.fixture
def record():
    """Record one acceptance outcome: record(criterion, passed, detail)."""

    def _record(criterion: int, passed: bool, detail: str) -> None:
        ACCEPTANCE.setdefault(criterion, []).append((bool(passed), detail))

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for c in sorted(ACCEPTANCE):
        entries = ACCEPTANCE[c]
        ok = all(p for p, _ in entries)
        detail = "; ".join(d for _, d in entries)
        terminalreporter.write_line(f"criterion {c:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
