"""Collects acceptance outcomes and prints one line per criterion."""

from __future__ import annotations

from collections import defaultdict

import pytest

CRITERIA = {
    "1": "Table 2 peaks within 0.02, < 5 s per row",
    "2": "Table 3 errors within 15%, h = 0.5 row < 60 s",
    "3": "Table 4 errors within 15% (x0 in {1, 0.5, 2})",
    "4": "convergence factor in [3.2, 4.8] from (h, dt) = (0.1, 0.0125)",
    "5": "property suites (basis, assembly, linalg, solver), < 30 s",
    "R": "supplementary: Table 3 errors fall monotonically with h at C_r = 0.5",
}

_outcomes: dict[str, list] = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id): acceptance criterion the test belongs to")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    notes = [v for k, v in report.user_properties if k == "note"]
    _outcomes[crit].append((report.nodeid.split("::")[-1], report.outcome, notes))


@pytest.fixture(autouse=True)
def _tag_criterion(request, record_property):
    marker = request.node.get_closest_marker("criterion")
    if marker is not None:
        record_property("criterion", str(marker.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit, title in CRITERIA.items():
        results = _outcomes.get(crit)
        if not results:
            tr.write_line(f"[ NOT RUN ] {crit}. {title}")
            continue
        passed = sum(outcome == "passed" for _, outcome, _ in results)
        status = "PASS" if passed == len(results) else "FAIL"
        tr.write_line(f"[{status:^9}] {crit}. {title}: {passed}/{len(results)} checks passed")
        for name, outcome, notes in results:
            if outcome != "passed" or notes:
                detail = "; ".join(notes)
                tr.write_line(f"             {outcome:<7} {name}{'  ' + detail if detail else ''}")
