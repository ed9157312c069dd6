"""
Shared fixtures: a hand-built illustrative instance and small random instances
Long acceptance runs are marked `slow` and only run with MULTICAST_RUN_SLOW=1
"""
import os
import sys
from dataclasses import replace
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from src.core import DemandVector, GenConfig, NetworkGraph, ProblemInstance, generate_instance  # noqa: E402

DATA_DIR = Path(__file__).resolve().parent / "data"

# s=0, a=1, b=2, u1=3, u2=4, u3=5
ILLUSTRATIVE_EDGES = {(0, 1): 2.0, (1, 3): 2.0, (1, 4): 1.0, (0, 2): 2.0, (2, 5): 1.0}
ILLUSTRATIVE_DEMANDS = ((3, 4.0), (4, 2.0), (5, 1.0))


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long acceptance run (set MULTICAST_RUN_SLOW=1)")


def pytest_collection_modifyitems(config, items):
    if os.environ.get("MULTICAST_RUN_SLOW") == "1":
        return
    skip = pytest.mark.skip(reason="slow; set MULTICAST_RUN_SLOW=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def make_instance(node_count, edges, demands, source=0, seed=0):
    graph = NetworkGraph(node_count=node_count, edges=dict(edges))
    return ProblemInstance(graph=graph, source=source, demands=DemandVector(tuple(demands)), seed=seed)


@pytest.fixture
def illustrative():
    """Two branches below the source; total cost 21 with demands 4 / 2 / 1"""
    return make_instance(6, ILLUSTRATIVE_EDGES, ILLUSTRATIVE_DEMANDS)


@pytest.fixture
def triangle():
    """Direct edge s-u costs 5, the detour through a costs 2"""
    return make_instance(3, {(0, 2): 5.0, (0, 1): 1.0, (1, 2): 1.0}, [(2, 1.0)])


def small_random_instances(count, node_count=7, user_count=3, p=0.5, first_seed=0):
    recipe = GenConfig(topology="erdos-renyi", node_count=node_count, user_count=user_count,
                       degree=None, p=p)
    return [generate_instance(replace(recipe, seed=first_seed + i))
            for i in range(count)]


@pytest.fixture
def small_instances():
    return small_random_instances(30)


@pytest.fixture
def regular_instance():
    return generate_instance(GenConfig(topology="random-regular", node_count=10, user_count=3,
                                       degree=3, seed=7))


@pytest.fixture(scope="session")
def desk_model():
    """GPN trained on the reduced desk schedule; only slow tests request it"""
    from src.gpn import TrainConfig, train
    from src.utils import load_config
    return train(load_config(ROOT / "configs" / "train_desk.yaml", TrainConfig)).model
