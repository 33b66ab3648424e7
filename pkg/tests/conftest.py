import functools
import os

import pytest
from hypothesis import HealthCheck, settings

from finikey.optimizer import OptimizationSpec, optimize_rate
from finikey.protocol import AttackModel, Protocol, ProtocolSpec

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=500, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@functools.lru_cache(maxsize=None)
def optimized(model: str, protocol: str, N: float, qber: float, eps_total: float = 1e-9):
    """Optimized RatePoint, memoized across the whole session."""
    spec = OptimizationSpec(AttackModel(model), ProtocolSpec(Protocol(protocol)), float(N), qber, eps_total)
    return optimize_rate(spec)


@pytest.fixture(scope="session")
def opt():
    return optimized


# acceptance lines are echoed in the terminal summary so they survive output capture
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
