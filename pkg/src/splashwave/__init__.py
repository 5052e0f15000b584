"""Spectral boundary-integral simulator for 2D periodic free-surface Euler flow."""

__version__ = "0.1.0"
