"""Hodge potentials of a point and the associated integrable hierarchy."""
from .free_energy import bernoulli, default_ring, free_energy
from .hierarchy import DiffOperator, Hierarchy, MiuraMap
from .hodge_recursion import HodgeRecursion, hodge_potential
from .jetring import DiffPoly, EpsExpansion, JetRing, canonical_text, parse
from .lambda_extract import Extractor

__all__ = [
    "DiffOperator", "DiffPoly", "EpsExpansion", "Extractor", "Hierarchy", "HodgeRecursion", "JetRing", "MiuraMap",
    "bernoulli", "canonical_text", "default_ring", "free_energy", "hodge_potential", "parse",
]
__version__ = "0.1.0"
