import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_acceptance: list[tuple[str, str, str]] = []


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if item.module.__name__.endswith("test_acceptance") and (
            rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed")):
        detail = dict(item.user_properties).get("detail", "")
        name = (item.function.__doc__ or item.name).strip().splitlines()[0]
        _acceptance.append((name, "PASS" if rep.passed else "FAIL", detail))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, detail in _acceptance:
        terminalreporter.write_line(f"{status}  {name}" + (f"  [{detail}]" if detail else ""))
