import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from orliczlab.family import FamilySpec, build_family, gross_lambda, log_F
from orliczlab.inequality import gaussian_measure
from orliczlab.young import power

settings.register_profile("orliczlab", max_examples=25, deadline=None, derandomize=True,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("orliczlab")


@pytest.fixture(scope="session")
def gamma():
    return gaussian_measure(160)


@pytest.fixture(scope="session")
def gross_family():
    """Standard family from (log, x^2, Gross lambda with rho = 2): Phi_t = |x|^{1 + e^{2t}}."""
    return build_family(FamilySpec(log_F(), power(2.0), gross_lambda(2.0)))


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list = []


@pytest.fixture
def acceptance():
    """``acceptance(n, ok, detail)`` records and prints one verdict line."""

    def record(n, ok, detail=""):
        line = f"ACCEPTANCE {n} {'PASS' if ok else 'FAIL'} {detail}".rstrip()
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
