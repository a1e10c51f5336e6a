import pytest
from hypothesis import settings

# first calls pay for JIT compilation
settings.register_profile("default", deadline=None)
settings.load_profile("default")

_LINES_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LINES_KEY] = []


@pytest.fixture
def report_line(request):
    """Record a one-line PASS/FAIL verdict that is echoed in the terminal summary."""
    lines = request.config.stash[_LINES_KEY]

    def record(label: str, ok: bool, detail: str = ""):
        line = f"{'PASS' if ok else 'FAIL'}  {label}  {detail}".rstrip()
        print(line)
        lines.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
