"""Reflection geometry of ellipsoids and convex bodies."""

__version__ = "0.1.0"
