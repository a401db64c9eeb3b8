"""genodyn - dynamics of gene regulatory networks.

Parse .grn network files, split them into core and layers, find equilibria
and periodic orbits, and locate the first bifurcation along a parameter.
"""

from .config import VERSION as __version__
from .errors import GenodynError
from .field import NetworkField, bind
from .netgraph import core_and_layers, validate
from .netlang import format_network, load_network, parse_network

__all__ = [
    "GenodynError",
    "NetworkField",
    "bind",
    "core_and_layers",
    "format_network",
    "load_network",
    "parse_network",
    "validate",
]
