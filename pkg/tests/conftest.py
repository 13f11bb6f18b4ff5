import os
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from automata import Alphabet, parse_regex  # noqa: E402

SEED = 20240517


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run the full acceptance corpora")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full acceptance corpora, opt-in with --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def ab():
    return Alphabet(("a", "b"))


@pytest.fixture
def regex(ab):
    return lambda text: parse_regex(text, ab)


@pytest.fixture
def seed():
    return SEED


@pytest.fixture
def data_dir():
    return os.path.join(os.path.dirname(__file__), "..", "Data")
