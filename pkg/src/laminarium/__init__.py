"""Curve complexes, hierarchies, model manifolds and quasi-Fuchsian limits.

Exact combinatorics on the once-punctured torus and four-punctured sphere,
numerical Teichmueller and Kleinian tools on the once-punctured torus, and
an analyzer for sequences of quasi-Fuchsian groups.
"""
from .curves import GOLDEN, INF, ZERO, Irrational, MappingClass, Rational, Slope, SurfaceSig, normalizer, twist
from .errors import LaminariumError

__version__ = "0.1.0"

__all__ = [
    "GOLDEN",
    "INF",
    "ZERO",
    "Irrational",
    "LaminariumError",
    "MappingClass",
    "Rational",
    "Slope",
    "SurfaceSig",
    "normalizer",
    "twist",
]
