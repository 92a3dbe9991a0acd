import json
from pathlib import Path

import pytest

from epiact import CompartmentState, GridSpec, ModelParams, integrate_nsfd, integrate_reference

DATA = Path(__file__).parent / "data"

_acceptance_lines = []


@pytest.fixture(scope="session")
def rates():
    return ModelParams.mexico2020()


@pytest.fixture(scope="session")
def x0():
    return CompartmentState.mexico2020()


@pytest.fixture(scope="session")
def nsfd_run(rates, x0):
    """Bundled scenario: k = 1 day over 200 days."""
    return integrate_nsfd(x0, rates, GridSpec(0.0, 200.0, 1.0))


@pytest.fixture(scope="session")
def ref_run(rates, x0):
    return integrate_reference(x0, rates, GridSpec(0.0, 200.0, 0.01))


@pytest.fixture(scope="session")
def truth():
    return json.loads((DATA / "mexico2020_truth.json").read_text())


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or report.when != "call":
        return
    status = "PASS" if report.passed else "FAIL"
    _acceptance_lines.append(f"[{status}] criterion {marker.args[0]}: {marker.kwargs.get('title', item.name)}")


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
