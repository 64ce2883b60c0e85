"""Numerical range boundaries, critical curves and continuity of the inverse map."""

__version__ = "0.1.0"
