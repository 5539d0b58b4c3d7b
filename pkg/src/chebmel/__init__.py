"""Numerical verification of Chebyshev-system criteria and Melnikov zero counts."""
__version__ = "0.1.0"
