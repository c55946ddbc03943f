import pytest


@pytest.fixture(autouse=True)
def _no_stored_calibration(monkeypatch):
    # tests use the default triangle constant unless they set a file themselves
    monkeypatch.delenv("HONEYVOL_CALIBRATION", raising=False)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[number].line())
    passed = sum(r.passed for r in RESULTS.values())
    terminalreporter.write_line(f"{passed}/{len(RESULTS)} criteria passed")
