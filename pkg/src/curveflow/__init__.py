"""Numerical laboratory for fully nonlinear curvature flows of closed hypersurfaces."""

__version__ = "0.1.0"

from .cones import CurvatureTuple, SymmetricCone, cyl_distance

__all__ = ["CurvatureTuple", "SymmetricCone", "cyl_distance", "__version__"]
