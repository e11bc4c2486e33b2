"""Numerical laboratory for Loewner evolutions."""

__version__ = "0.1.0"
