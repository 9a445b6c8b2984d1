"""Exact simplicial Chern-Weil theory and relative Chern character cocycles."""

__version__ = "0.1.0"
