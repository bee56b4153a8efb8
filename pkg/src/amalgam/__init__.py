"""Hrushovski-style amalgamation toolkit for computable model theory experiments."""

__version__ = "0.1.0"
