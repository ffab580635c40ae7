"""Numerical laboratory for weighted degenerate elliptic Neumann problems
with Caffarelli--Kohn--Nirenberg weights."""

__version__ = "0.1.0"
