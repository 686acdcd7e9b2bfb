import numpy as np
import pytest

from graphonwalk.graphons import Affine, Block, Constant, Separable, Stripe, Threshold


def connected_block():
    return Block([[0.8, 0.2], [0.2, 0.6]])


def disconnected_block():
    return Block([[1.0, 0.0], [0.0, 1.0]])


def solver_graphons():
    """Connected families satisfying the degree lower bound."""
    return {
        "constant": Constant(0.5),
        "stripe": Stripe(0.25),
        "block": connected_block(),
        "threshold": Threshold(2.0),
        "affine": Affine([(0.5, Stripe(0.25)), (0.3, Constant(1.0))], offset=0.1),
    }


def builtin_graphons():
    g = solver_graphons()
    g["separable"] = Separable()
    g["threshold1"] = Threshold(1.0)
    g["disconnected"] = disconnected_block()
    return g


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# (criterion, passed, detail) records filled by test_acceptance.py
ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in sorted(ACCEPTANCE_RESULTS, key=lambda r: int(r[0].split()[1].rstrip(":"))):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name} {detail}")
