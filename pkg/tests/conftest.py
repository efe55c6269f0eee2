import numpy as np
import pytest

from fblquad.dynamics import VehicleState
from fblquad.geometry import exp_so3


def random_state(rng, u_range=(4.0, 30.0)):
    return VehicleState(
        p=rng.normal(size=3),
        v=rng.normal(size=3),
        R=exp_so3(rng.normal(size=3) * 1.5),
        omega=rng.normal(size=3) * 2.0,
        u=float(rng.uniform(*u_range)),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE = {}


def record(number, passed, detail):
    ACCEPTANCE[str(number)] = (bool(passed), detail)
    return bool(passed)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
