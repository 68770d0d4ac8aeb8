"""Numerical checks for weighted Bergman projections and Forelli-Rudin-type operators
on the minimal ball and the cone manifold over it."""

__version__ = "0.1.0"
