"""Exact and Monte Carlo tools for random proper colorings of Z^d."""

__version__ = "0.1.0"
