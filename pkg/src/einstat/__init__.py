"""Symbolic-numeric verification of constant-curvature structure for
exponential-family information manifolds."""

__version__ = "0.1.0"
