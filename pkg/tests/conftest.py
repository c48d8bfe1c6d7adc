import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

FOUR_AGENT_Y0 = np.array([[1, 2, 5], [-1, -2, 5], [-1, -2, 5], [1, 2, 5]], dtype=float)
FOUR_AGENT_LIMIT = np.array([[0, 0, 5]] * 4, dtype=float)


@pytest.fixture
def four_agent():
    return FOUR_AGENT_Y0.copy()


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, name: str, passed: bool, detail: str = "") -> None:
    line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {name}"
    if detail:
        line += f" :: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
