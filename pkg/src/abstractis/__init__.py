"""Finite shadows of abstraction principles and the set theory they carry."""

__version__ = "0.1.0"
