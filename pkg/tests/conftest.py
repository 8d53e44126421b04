import pytest

from multihop_secrecy import NetworkConfig

_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def defaults():
    """L = 50 m, alpha = 3, p = 100 dB, lambda_e = 1e-5, epsilon = 0.05."""
    return NetworkConfig(L=50.0, alpha=3.0, p=1e10, lambda_e=1e-5, epsilon=0.05)


@pytest.fixture
def record(request):
    """Record one acceptance verdict; every verdict is echoed at session end."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def _record(label, passed, detail=""):
        line = f"{'PASS' if passed else 'FAIL'}  {label}" + (f"  ({detail})" if detail else "")
        lines.append(line)
        with request.config.pluginmanager.get_plugin("capturemanager").global_and_fixture_disabled():
            print(f"\n[acceptance] {line}")
        return passed

    return _record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
