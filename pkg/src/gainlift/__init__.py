"""Constraint deletion for coset-list modular equations over Z/2^d via gain-graph lifting."""

__version__ = "0.1.0"
