from __future__ import annotations

import os

from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=400, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("GNPFORGE_HYPOTHESIS", "default"))


def pytest_terminal_summary(terminalreporter):
    import sys

    for mod in list(sys.modules.values()):
        if getattr(mod, "__name__", "").endswith("test_acceptance") and hasattr(mod, "summary_lines"):
            lines = mod.summary_lines()
            if lines:
                terminalreporter.section("acceptance criteria")
                for line in lines:
                    terminalreporter.write_line(line)
            break
