"""Finite-depth perfect-tree forcing machinery."""
__version__ = "0.1.0"
