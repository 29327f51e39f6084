import pytest

_CRITERIA: dict[int, list[bool]] = {}
_TITLES: dict[int, str] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m:
            _TITLES.setdefault(m.args[0], m.kwargs.get("title", item.name))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m and (rep.when == "call" or rep.failed):
        _CRITERIA.setdefault(m.args[0], []).append(rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_TITLES):
        results = _CRITERIA.get(n)
        status = "NOT RUN" if not results else ("PASS" if all(results) else "FAIL")
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {_TITLES[n]}")
