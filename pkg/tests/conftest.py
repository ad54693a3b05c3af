import os
import sys

import pytest

# make the oracle helpers importable as a plain module
sys.path.insert(0, os.path.dirname(__file__))

_criteria: dict[int, tuple[str, str, float]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n = mark.args[0]
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        _criteria[n] = ("PASS" if rep.passed else "FAIL", item.name, rep.duration)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        status, name, dur = _criteria[n]
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {name} ({dur:.2f} s)")
