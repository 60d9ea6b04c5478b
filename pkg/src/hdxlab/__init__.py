"""Desk-scale laboratory for spherical buildings over small prime fields,
affine unique games over symmetric groups, cones-method propagation,
restrict-solve-align-lift solving, and 2-query direct product testing."""

__version__ = "0.1.0"
