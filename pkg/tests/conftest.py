from pathlib import Path

import pytest

from tmcodes.algebra import gf
from tmcodes.network import make_topology, random_certified_instance

FIXTURES = Path(__file__).parent / "fixtures"

# two packets relayed through one node: C=2, E=4
RELAY_EDGES = [("s", "a"), ("s", "a"), ("a", "t"), ("a", "t")]
BUTTERFLY_EDGES = [("s", "a"), ("s", "b"), ("a", "c"), ("b", "c"), ("c", "d"), ("a", "t"), ("d", "t")]


@pytest.fixture(scope="session")
def relay_topology():
    return make_topology(RELAY_EDGES, "s", "t")


@pytest.fixture(scope="session")
def relay_instance(relay_topology):
    inst, _ = random_certified_instance(relay_topology, gf(2), 0)
    return inst


@pytest.fixture(scope="session")
def butterfly_topology():
    return make_topology(BUTTERFLY_EDGES, "s", "t")
