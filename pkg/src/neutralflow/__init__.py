"""Numerical laboratory for mean curvature flow of purely twisting
rotationally symmetric line congruences in the space of oriented lines."""

__version__ = "0.1.0"

from . import ambient, family, geometry, oracle, profiles, solver, verification  # noqa: F401
