"""Spherical-harmonic discretization of scaled transport on a periodic box,
with a collided/uncollided splitting, closed-form error bound evaluators,
and a verification harness."""

__version__ = "0.1.0"
