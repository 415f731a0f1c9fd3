"""Numerical toolkit for conformality of petals of holomorphic semigroups."""

__version__ = "0.1.0"
