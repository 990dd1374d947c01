import numpy as np
import pytest

from crowdwise import NoiseModel, validate_network
from helpers import REF_P, REF_SIGMA2

_acceptance_lines = []


@pytest.fixture(scope="session")
def ref_net():
    return validate_network(REF_P)


@pytest.fixture(scope="session")
def ref_noise():
    return NoiseModel(np.array(REF_SIGMA2))


@pytest.fixture
def criterion():
    """Record a one-line pass/fail verdict for an acceptance criterion."""

    def record(number, title, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}"
        if detail:
            line += f" ({detail})"
        _acceptance_lines.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_acceptance_lines):
        terminalreporter.write_line(line)
