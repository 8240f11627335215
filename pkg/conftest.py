import os

import pytest

os.environ.setdefault("INLAB_PROGRESS", "0")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: trains or simulates for more than a few seconds")


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run tests marked slow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)
