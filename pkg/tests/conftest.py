import os

from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
