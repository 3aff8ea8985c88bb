from __future__ import annotations

from collections.abc import Callable

import pytest

_CRITERIA = pytest.StashKey[list]()


@pytest.fixture
def criterion(request: pytest.FixtureRequest) -> Callable[[str, bool, str], None]:
    """Record one pass/fail line for an acceptance criterion."""
    lines = request.config.stash.setdefault(_CRITERIA, [])

    def report(name: str, passed: bool, detail: str) -> None:
        line = f"{name}: {'PASS' if passed else 'FAIL'}  {detail}"
        print(line)
        lines.append(line)

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config) -> None:
    lines = config.stash.get(_CRITERIA, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s[1:s.index(":")])):
            terminalreporter.write_line(line)
