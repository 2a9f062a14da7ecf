import pytest

from lotto.primitives import _group, ecvrf


@pytest.fixture(params=["default", "pure"])
def vrf_backend(request, monkeypatch):
    """Run a test on the active group backend and on the pure-Python one."""
    if request.param == "pure":
        monkeypatch.setattr(ecvrf, "GROUP", _group.PureGroup())
    return ecvrf.GROUP.name


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in RESULTS:
        terminalreporter.write_line(line)
