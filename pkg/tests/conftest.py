import os
import random
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from core.dnc import OracleFunctionalTable  # noqa: E402
from core.strings import BoundedString, Order  # noqa: E402


@pytest.fixture
def h3():
    return Order((3, 3, 3))


@pytest.fixture
def h8():
    return Order((8, 8, 8, 8))


@pytest.fixture
def rng():
    return random.Random(20240601)


def everywhere_one(order: Order) -> OracleFunctionalTable:
    """Functional that outputs 1 at every input as soon as the input is in range"""
    empty = BoundedString.empty(order)
    return OracleFunctionalTable(order, {(empty, x): 1 for x in range(order.depth)})


def never_one(order: Order) -> OracleFunctionalTable:
    return OracleFunctionalTable(order, {})


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: randomized suites at full trial counts")
