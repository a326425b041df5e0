"""Exact-arithmetic kernels: truncated Novikov series, Maurer-Cartan solvers,
integer lattice saturation, tropical plane curves, and flux linear algebra."""

__version__ = "0.1.0"
