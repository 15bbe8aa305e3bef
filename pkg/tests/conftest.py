import pytest

from deephole import _pykernels

try:
    from deephole import _kernels
except ImportError:  # extension not built
    _kernels = None


@pytest.fixture(params=["python", "cython"])
def kernels(request):
    if request.param == "cython":
        if _kernels is None:
            pytest.skip("compiled kernels not built")
        return _kernels
    return _pykernels


# filled by tests/test_acceptance.py; one (criterion, passed, detail) entry per check
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE_LINES:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
