"""Deterministic simulator for a tokenised building-data-asset ecosystem and its DAO."""

from .apportion import largest_remainder
from .canonical import HASH_ALGORITHM, digest
from .ledger import Role, TokenClass
from .scenario import export_reports, load_scenario, parse_scenario, run_scenario
from .tension import Edge, Structure
from .world import World

__all__ = [
    "HASH_ALGORITHM",
    "Edge",
    "Role",
    "Structure",
    "TokenClass",
    "World",
    "digest",
    "export_reports",
    "largest_remainder",
    "load_scenario",
    "parse_scenario",
    "run_scenario",
]

__version__ = "0.1.0"
