import pytest
from hypothesis import HealthCheck, settings

from tricycle.protocol import build_cycle

settings.register_profile(
    "repo", deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile("repo")

# Lines collected by the acceptance suite, echoed in the terminal summary.
ACCEPTANCE_LINES = []


@pytest.fixture
def default_params():
    return build_cycle(alpha=0.8, taus=(20.0, 5.0, 20.0))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
