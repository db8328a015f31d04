from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_criteria: dict[int, dict] = {}


def pytest_runtest_logreport(report: pytest.TestReport) -> None:
    marker = report.user_properties and dict(report.user_properties).get("criterion")
    if not marker:
        return
    number, title = marker
    entry = _criteria.setdefault(number, {"title": title, "outcome": "passed"})
    if report.skipped:
        entry["outcome"] = "skipped"
    elif report.failed:
        entry["outcome"] = "failed"


def pytest_collection_modifyitems(items: list[pytest.Item]) -> None:
    # recorded at collection so tests skipped before setup still report
    for item in items:
        marker = item.get_closest_marker("criterion")
        if marker is not None:
            item.user_properties.append(("criterion", tuple(marker.args)))


def pytest_terminal_summary(terminalreporter, exitstatus, config) -> None:
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        label = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[entry["outcome"]]
        terminalreporter.write_line(f"[{label}] criterion {number}: {entry['title']}")
