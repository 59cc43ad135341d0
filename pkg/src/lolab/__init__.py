"""Exact and Fourier-analytic tools for forward and inverse Littlewood-Offord problems."""

__version__ = "0.1.0"
