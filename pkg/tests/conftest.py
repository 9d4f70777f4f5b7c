from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from cqedprobe.model import ChainModel, reference_probe

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

#: Lines appended by the acceptance suite, echoed at the end of the run.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def probe():
    return reference_probe()


@pytest.fixture
def ring20():
    return ChainModel.from_ratio(20, 0.2)
