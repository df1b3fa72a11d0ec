import numpy as np
import pytest

from hiervc.core import Frame, Sequence


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_frame(plane) -> Frame:
    plane = np.asarray(plane, dtype=np.uint8)
    return Frame(plane.shape[1], plane.shape[0], plane)


def make_sequence(planes) -> Sequence:
    return Sequence(tuple(make_frame(p) for p in planes))


def pytest_configure(config):
    config._acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
