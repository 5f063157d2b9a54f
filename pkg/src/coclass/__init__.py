"""Cohomological toolkit for p-groups acting uniserially on p-adic lattices."""

__version__ = "0.1.0"
