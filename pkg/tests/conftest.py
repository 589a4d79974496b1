"""Collects acceptance outcomes and prints one line per criterion at the end of the run."""
import pytest

ACCEPTANCE = {}  # criterion -> list of (test id, passed, detail)
DETAILS = {}  # test id -> list of detail strings recorded during the test


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(name): test belongs to an acceptance criterion")


@pytest.fixture
def report(request):
    """Attach a measurement line to the current acceptance test."""
    lines = DETAILS.setdefault(request.node.nodeid, [])
    return lines.append


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        ACCEPTANCE.setdefault(marker.args[0], []).append((item.nodeid, rep.passed, DETAILS.get(item.nodeid, [])))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for name in sorted(ACCEPTANCE, key=lambda s: int(s[2:])):
        results = ACCEPTANCE[name]
        ok = all(passed for _id, passed, _d in results)
        failed = [nodeid.split("::")[-1] for nodeid, passed, _d in results if not passed]
        tail = f" ({len(results)} checks)" if ok else f" (failed: {', '.join(failed)})"
        tr.write_line(f"{name}: {'PASS' if ok else 'FAIL'}{tail}")
        for _id, _p, details in results:
            for line in details:
                tr.write_line(f"    {line}")
