import math

import pytest

from omckit import presets
from omckit.geometry import defect_cell, mirror_cell


@pytest.fixture
def device():
    return presets.DEVICE


@pytest.fixture
def defect():
    return defect_cell()


@pytest.fixture
def mirror():
    return mirror_cell()


def rel(a, b):
    return abs(a - b) / abs(b)


TWO_PI = 2 * math.pi


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
