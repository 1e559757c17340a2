import numpy as np
import pytest

from stefan_inverse.assembly import assemble
from stefan_inverse.problems import example1, example2


@pytest.fixture(scope="session")
def ex1_default():
    cfg, traj, ic = example1()
    return cfg, traj, ic, assemble(traj, cfg)


@pytest.fixture(scope="session")
def ex2_default():
    cfg, traj, ic = example2()
    return cfg, traj, ic, assemble(traj, cfg)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# (criterion, passed, detail) rows recorded by test_acceptance.py
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit, ok, detail in sorted(ACCEPTANCE, key=lambda r: (int(r[0].split(".")[0]), r[0])):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {crit}: {detail}")
