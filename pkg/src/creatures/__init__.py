"""Finite combinatorics of norm-carrying forcing creatures."""

__version__ = "0.1.0"
