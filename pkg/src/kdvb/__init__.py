"""Numerical laboratory for the KdV-Burgers equation on the torus."""

__version__ = "0.1.0"
