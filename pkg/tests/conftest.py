import math
from pathlib import Path

import numpy as np
import pytest

from givp import build_pslg

DATA = Path(__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden"


def triangle(side=4.0):
    return build_pslg([[0, 0], [side, 0], [side / 2, side * math.sqrt(3) / 2]], [[0, 1], [1, 2], [0, 2]])


def square():
    return build_pslg([[0, 0], [1, 0], [1, 1], [0, 1]], [[0, 1], [1, 2], [2, 3], [0, 3]])


@pytest.fixture
def tri():
    return triangle()


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def golden_dir():
    return GOLDEN


ACCEPTANCE_LINES = {}


def record_criterion(number, ok, detail):
    ACCEPTANCE_LINES[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'} | {detail}"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
