import re
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_acceptance = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        label = marker.args[0] if marker.args else item.name
        _acceptance[label] = (rep.passed, rep.duration)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    # sub-parts such as "10a" and "10b" share one line
    groups = {}
    for label, (ok, dur) in _acceptance.items():
        num = int(re.match(r"\d+", label).group())
        groups.setdefault(num, []).append((label, ok, dur))
    terminalreporter.section("acceptance criteria")
    for num in sorted(groups):
        parts = sorted(groups[num])
        ok = all(p[1] for p in parts)
        detail = "; ".join(f"{label} {'pass' if good else 'FAIL'}" for label, good, _ in parts)
        dur = sum(p[2] for p in parts)
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  [{detail}]  ({dur:.2f} s)")
