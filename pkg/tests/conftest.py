import pytest

from semiquant import PhysicalScale, make_builtin

_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def unit_scale():
    return PhysicalScale(1.0)


@pytest.fixture(scope="session")
def tanh2_12():
    return make_builtin("tanh2", U=12.0)


@pytest.fixture(scope="session")
def harmonic():
    return make_builtin("harmonic")


@pytest.fixture(scope="session")
def gauss_1():
    return make_builtin("gauss", U=1.0, w=1.0)


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = []


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line per acceptance criterion for the summary."""
    lines = request.config.stash[_ACCEPTANCE_KEY]

    def record(label, ok, detail):
        lines.append(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
