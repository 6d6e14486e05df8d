import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dngedge import families
from dngedge.spacetime import minkowski

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def flat():
    return minkowski(4)


@pytest.fixture(scope="session")
def helicoid_half():
    """Helicoid at u = 1/2 (mu = M = R = 1)."""
    return families.build("helicoid", omega0=np.sqrt(0.5), R=1.0)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
