# conftest.py - Shared fixtures: the shipped networks and a text-to-network helper

from pathlib import Path

import pytest

from genodyn.field import bind
from genodyn.netgraph import validate
from genodyn.netlang import load_network, parse_network

NETWORKS_DIR = Path(__file__).parent / "genodyn" / "networks"
SHIPPED = sorted(p.stem for p in NETWORKS_DIR.glob("*.grn"))


def load_shipped(name: str):
    return validate(load_network(NETWORKS_DIR / f"{name}.grn"))


@pytest.fixture
def networks_dir() -> Path:
    return NETWORKS_DIR


@pytest.fixture
def shipped():
    """Loader for shipped networks by name."""
    return load_shipped


@pytest.fixture(params=SHIPPED)
def any_shipped(request):
    return load_shipped(request.param)


@pytest.fixture
def build():
    """Parse and validate .grn text in one go."""
    def _build(src: str, require_connected: bool = True):
        return validate(parse_network(src), require_connected=require_connected)
    return _build


@pytest.fixture
def toggle():
    return load_shipped("toggle")


@pytest.fixture
def repressilator():
    return load_shipped("repressilator")


@pytest.fixture
def bound():
    """(network, binding) for a shipped network with overrides."""
    def _bound(name: str, **overrides):
        net = load_shipped(name)
        return net, bind(net, overrides)
    return _bound
