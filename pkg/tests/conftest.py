import math

import numpy as np
import pytest

from ringgas import build_from_laplacian_profile, builtin_cubic, detect_criticality, gaussian

# lines recorded by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def report(label: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"{label}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def cubic():
    return builtin_cubic(math.sqrt(3.0), 1.0)


@pytest.fixture(scope="session")
def crit(cubic):
    return detect_criticality(cubic)


@pytest.fixture(scope="session")
def ginibre():
    return gaussian(1.0)


@pytest.fixture(scope="session")
def quartic_ring():
    """Laplacian (1 + r)(r - 1)^4: a fourth-order zero at r = 1."""
    P = np.polynomial.Polynomial
    return build_from_laplacian_profile(P([1.0, 1.0]) * P([-1.0, 1.0]) ** 4)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
