import os
import sys

import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

DATA_DIR = os.path.abspath(os.path.join(os.path.dirname(__file__), '..', 'data'))


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="run acceptance-scale tests marked slow")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: acceptance-scale test, needs --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def data_path():
    """Absolute path of a file in the data directory."""
    def resolve(name):
        return os.path.join(DATA_DIR, name)
    return resolve
