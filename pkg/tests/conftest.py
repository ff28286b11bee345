import numpy as np
import pytest

from edgesym.densities import gaussian, laplace, logistic, power_exponential, student


ALL_FAMILIES = ["gaussian", "laplace", "logistic", "powerexp:2", "student:5"]


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def family_objects():
    return [gaussian(), laplace(), logistic(), power_exponential(2), student(5)]


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = {}


def record_criterion(number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
