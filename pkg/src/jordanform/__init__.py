"""Numerical Jordan canonical form via unitary-staircase decompositions."""

__version__ = "0.1.0"
