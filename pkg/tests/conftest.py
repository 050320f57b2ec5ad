import pytest

ACCEPTANCE: list[str] = []


@pytest.fixture
def criterion():
    """Record one summary line per acceptance criterion."""
    lines = []

    def record(number: int, ok: bool, elapsed: float, detail: str):
        lines.append(f"criterion {number}: {'PASS' if ok else 'FAIL'} ({elapsed:.2f}s) {detail}")

    yield record
    ACCEPTANCE.extend(lines)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
