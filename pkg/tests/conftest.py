import numpy as np
import pytest

from eitprop.model import GaussianPulse, MediumParams
from eitprop.propagation import ModeGrid

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def long_pulse():
    return GaussianPulse.from_width(1.0, 4.0)


@pytest.fixture
def short_pulse():
    return GaussianPulse.from_width(1.0, 0.3)


@pytest.fixture
def fig2_medium():
    return MediumParams.from_dimensionless(0.5, velocity_shift=0.75)


@pytest.fixture
def long_grid(long_pulse):
    return ModeGrid.for_pulse(long_pulse, 1024)
