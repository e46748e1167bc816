import pytest
from pathlib import Path

from berger.generators import generate_family
from berger.scenario import load_instance

FIXTURE_DIR = Path(__file__).parent / "fixtures"

MESSAGE = b"the payload"


@pytest.fixture(scope="session")
def octahedron():
    return load_instance(FIXTURE_DIR / "octahedron.json")


@pytest.fixture(scope="session")
def worm():
    """Three-connected graph whose reduced graph is disconnected."""
    return load_instance(FIXTURE_DIR / "worm.json")


@pytest.fixture(scope="session")
def dent_prism():
    """Admissible instance whose green face is the external face."""
    return load_instance(FIXTURE_DIR / "dent_prism.json")


@pytest.fixture(scope="session")
def greedy_trap():
    """Admissible instance where greedy distance routing hits a local minimum."""
    return load_instance(FIXTURE_DIR / "greedy_trap.json")


@pytest.fixture(scope="session")
def double_ring_12():
    return generate_family("double-ring", 12, 1)


@pytest.fixture(scope="session")
def gabriel_40():
    return generate_family("gabriel-unit-disk", 40, 1)


def by_label(inst):
    return {inst.label(p): p for p in inst.graph.nodes}
