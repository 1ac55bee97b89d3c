import numpy as np
import pytest

from slitloops import CouplingModel, DetectorGrid, Illumination, SlitArray

LAMBDA = 810e-9
WIDTH = 200e-9
PITCH = 4.6e-6

_acceptance_lines: dict[int, str] = {}


@pytest.fixture(scope="session")
def slits():
    return SlitArray(WIDTH, PITCH, 3)


@pytest.fixture(scope="session")
def plane_wave():
    return Illumination.plane_wave(LAMBDA, 3)


@pytest.fixture(scope="session")
def loop_coupling():
    return CouplingModel(1.65, (0.3, 0.15), 1)


@pytest.fixture(scope="session")
def grid():
    return DetectorGrid.linspace(-0.4, 0.4, 801)


@pytest.fixture
def criterion():
    """Record one acceptance line; call before asserting so failures are reported too."""

    def record(number: int, passed: bool, detail: str) -> bool:
        _acceptance_lines[number] = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_lines:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance_lines):
        terminalreporter.write_line(_acceptance_lines[number])


def rel_close(a, b, rtol):
    a, b = np.asarray(a), np.asarray(b)
    return np.all(np.abs(a - b) <= rtol * np.maximum(np.abs(b), 1e-300))
