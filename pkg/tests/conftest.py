import re

import pytest

_criteria: dict[str, list[str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    match = re.match(r"test_criterion_(\d+)_(\w+)", item.originalname or item.name)
    if not match or item.module.__name__ != "test_acceptance":
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        number = int(match.group(1))
        title = f"criterion {number:2d}: {match.group(2).replace('_', ' ')}"
        _criteria.setdefault(title, []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for title in sorted(_criteria):
        outcomes = _criteria[title]
        verdict = "PASS" if all(o == "passed" for o in outcomes) else "FAIL"
        terminalreporter.write_line(f"{verdict}  {title}")
