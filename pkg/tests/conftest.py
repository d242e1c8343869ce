"""Shared fixtures. Acceptance criteria report one line each at the end of the run."""

import pytest

_LINES: list[str] = []


@pytest.fixture
def report():
    def emit(criterion: str, ok: bool, detail: str) -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
        _LINES.append(line)
        print(line)

    return emit


def _order(line: str) -> tuple[int, str]:
    label = line.split("criterion ")[1].split(":")[0]
    digits = "".join(ch for ch in label if ch.isdigit())
    return int(digits), label


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=_order):
            terminalreporter.write_line(line)
