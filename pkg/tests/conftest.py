"""Collects acceptance-criterion outcomes and prints one line per criterion."""
import pytest

_RESULTS: dict[str, list] = {}
_NOTES: dict[str, list[str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    # a failing fixture counts against the criterion too
    if rep.when != "call" and not rep.failed:
        return
    cid, title = mark.args
    _RESULTS.setdefault(cid, [title, []])[1].append(rep.passed)


@pytest.fixture
def note(request):
    """Attach a measured value to the criterion of the running test."""
    mark = request.node.get_closest_marker("criterion")

    def add(text: str) -> None:
        _NOTES.setdefault(mark.args[0], []).append(text)

    return add


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid in sorted(_RESULTS, key=lambda c: int(c[1:])):
        title, outcomes = _RESULTS[cid]
        status = "PASS" if outcomes and all(outcomes) else "FAIL"
        tr.write_line(f"{cid} {status}  {title}")
        for text in _NOTES.get(cid, []):
            tr.write_line(f"      {text}")
