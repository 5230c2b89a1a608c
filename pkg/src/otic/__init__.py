"""Orchestration engine for a multi-tenant O-RAN test facility.

Allocates subnets, VLAN IDs and switch port configurations for test
sessions, compiles test intents into logical topologies and checks them
against a simulated switch fabric.
"""

from otic.errors import OticError
from otic.session import Engine

__all__ = ["Engine", "OticError"]
__version__ = "0.1.0"
