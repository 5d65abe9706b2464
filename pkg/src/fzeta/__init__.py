"""Fractal zeta functions of unbounded drums at infinity."""

__version__ = "0.1.0"
