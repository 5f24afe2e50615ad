import os

import numpy as np
import pytest

from graphsynth.graphs import Graph

# 6-node fixture whose LC orbit contains exactly two graphs up to node
# relabeling; the minimum edge count over the orbit is 9, yet decimation
# with CX/CY actions prepares it with 7 two-qubit gates.
TWO_CLASS_ORBIT_EDGES = [
    (0, 1), (2, 3), (4, 5), (1, 3), (2, 5), (0, 4), (3, 4), (1, 2), (0, 5),
]


def pytest_collection_modifyitems(config, items):
    if os.environ.get("GRAPHSYNTH_RUN_SLOW"):
        return
    skip = pytest.mark.skip(reason="set GRAPHSYNTH_RUN_SLOW=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def two_class_orbit_graph() -> Graph:
    return Graph.from_edges(6, TWO_CLASS_ORBIT_EDGES)


def random_graph(n: int, rng, p: float = 0.5) -> Graph:
    adj = rng.random((n, n)) < p
    adj = np.triu(adj, 1)
    return Graph(adj | adj.T)
