import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

ACCEPTANCE: dict[int, str] = {}
TABLES: list[tuple[str, list[str]]] = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def record():
    """Register one acceptance line (and optional table) for the terminal summary."""
    def _record(number: int, passed: bool, detail: str, table: list[str] | None = None):
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE[number] = line
        print(line)
        if table:
            TABLES.append((f"criterion {number} table", table))
            print("\n".join(table))
        return passed
    return _record


def pytest_terminal_summary(terminalreporter):
    for title, rows in TABLES:
        terminalreporter.section(title)
        for row in rows:
            terminalreporter.write_line(row)
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
