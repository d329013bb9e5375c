import sys
from importlib.resources import files
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pgcl import parse  # noqa: E402

PROGRAMS = Path(str(files("pgcl.programs")))


def load(name):
    return parse((PROGRAMS / name).read_text())


@pytest.fixture
def programs_dir():
    return PROGRAMS


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
