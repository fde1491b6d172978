import sys
from pathlib import Path

from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

import pytest

_CRITERIA = {}


@pytest.fixture
def criterion(request, capsys):
    """Record one acceptance line; pass/fail follows the test outcome."""
    number, title = request.node.get_closest_marker("criterion").args
    info = {}
    yield info
    rep = getattr(request.node, "rep_call", None)
    ok = rep is not None and rep.passed
    line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {title}"
    if info:
        line += " (" + ", ".join(f"{k}={v}" for k, v in info.items()) + ")"
    _CRITERIA[number] = line
    with capsys.disabled():
        print("\n" + line)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance")
        for number in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[number])
