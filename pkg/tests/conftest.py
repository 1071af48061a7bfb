import os

from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

import pytest

ACCEPTANCE_LINES = {}


@pytest.fixture
def criterion(request):
    """Record per-check outcomes for one acceptance criterion and print a summary line."""

    class Recorder:
        def __init__(self, name):
            self.name = name
            self.checks = []

        def check(self, label, value, ok):
            self.checks.append((label, value, bool(ok)))
            return ok

        def info(self, label, value):
            self.checks.append((label, value, None))

        @property
        def passed(self):
            return all(ok is not False for _, _, ok in self.checks)

        def finish(self):
            status = "PASS" if self.passed else "FAIL"
            parts = []
            for label, value, ok in self.checks:
                mark = "" if ok is None else (" ok" if ok else " MISS")
                parts.append(f"{label}: {value}{mark}")
            ACCEPTANCE_LINES[self.name] = f"{self.name} {status} | " + "; ".join(parts)
            failed = [f"{label}: {value}" for label, value, ok in self.checks if ok is False]
            assert not failed, f"{self.name} not met: " + "; ".join(failed)

    name = request.node.get_closest_marker("criterion").args[0]
    return Recorder(name)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion identifier")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for name in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[name])
