import pytest
from hypothesis import HealthCheck, settings

from amalgam.builder import BuildConfig, run

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

CRITERIA = {}


@pytest.fixture(scope="session")
def run200():
    """The scripted 200-stage run shared by the builder criteria."""
    return run(BuildConfig(n=1), 200)


@pytest.fixture
def criterion():
    def record(number: int, title: str, ok: bool, detail: str = "") -> None:
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}" + (f"  ({detail})" if detail else "")
        CRITERIA[number] = line
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for k in sorted(CRITERIA):
            terminalreporter.write_line(CRITERIA[k])
