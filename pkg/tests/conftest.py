import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from jurisdictions import Instance  # noqa: E402


@pytest.fixture
def six():
    """Six agents on [0, 4.1]: one at 0, two at 1.9, three at 4.1; linear d, g = 1."""
    return Instance.from_peaks([0, 1.9, 1.9, 4.1, 4.1, 4.1])


@pytest.fixture
def coincident():
    return Instance.from_peaks([[1.0, 1.0]] * 4, project_cost=2.0)


_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion covered by the test")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, text = marker.args
    if call.when == "call" or (call.when == "setup" and call.excinfo is not None):
        ok = call.excinfo is None
        prev = _criteria.get(number, (True, text))[0]
        _criteria[number] = (prev and ok, text)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        ok, text = _criteria[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {text}")
