import pytest

# filled by tests/test_acceptance.py: criterion -> (passed, detail)
ACCEPTANCE = {}


@pytest.fixture
def record():
    def _record(name, passed, detail=""):
        ACCEPTANCE[name] = (bool(passed), detail)
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, (ok, detail) in ACCEPTANCE.items():
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
