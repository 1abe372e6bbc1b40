import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        rep.criterion = mark.args


def pytest_terminal_summary(terminalreporter):
    rows = {}
    for reports in terminalreporter.stats.values():
        for rep in reports:
            crit = getattr(rep, "criterion", None)
            if crit is None:
                continue
            # a failure in any phase fails the criterion
            if rep.when == "call" or rep.failed:
                prev = rows.get(crit)
                if prev is None or rep.failed:
                    detail = dict(rep.user_properties).get("detail", "")
                    rows[crit] = (rep.passed, detail or (prev[1] if prev else ""))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for (num, title), (ok, detail) in sorted(rows.items()):
        line = f"criterion {num} [{title}]: {'PASS' if ok else 'FAIL'}"
        terminalreporter.write_line(line + (f"  ({detail})" if detail else ""))
