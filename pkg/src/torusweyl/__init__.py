"""Weyl-quantised Berry-Keating operator on a torus phase space."""

__version__ = "0.1.0"
