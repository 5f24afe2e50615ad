import os

import pytest

from rl_trainer.client import BridgeServer


def pytest_collection_modifyitems(config, items):
    if os.environ.get("GRAPHSYNTH_RUN_SLOW"):
        return
    skip = pytest.mark.skip(reason="set GRAPHSYNTH_RUN_SLOW=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def server():
    with BridgeServer() as srv:
        yield srv


@pytest.fixture
def channel(server):
    ch = server.connect()
    yield ch
    ch.close()
