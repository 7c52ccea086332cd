"""Solvers for local simultaneous state discrimination games."""

__version__ = "1.0.0"
