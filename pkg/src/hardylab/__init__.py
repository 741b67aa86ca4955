"""Numerical laboratory for Hardy-space operator theory."""

__version__ = "0.1.0"
