"""Exact Koszul cohomology of section rings, jet conditions on zero-cycles,
and sweep experiments over the twisting degree."""

__version__ = "0.1.0"
