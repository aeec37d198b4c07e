"""Exact torsion computations for invariant G-structures on nilpotent Lie
algebras, with numeric labs for surface geodesics and volume expansions."""

__version__ = "0.1.0"
